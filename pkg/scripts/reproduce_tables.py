"""Sweep modes, patch sizes and depths over an image tree and print CSV rows.

    python3 scripts/reproduce_tables.py ROOT [--train-per-class 15] [--reps 5]
        [--resize 32x32] [--patches 3,5,7] [--stages 1,2] [--overlap 0.5]

Not part of the test suite. ROOT is laid out as ``ROOT/<class>/<image>``;
grey-level images are skipped at ingestion.
"""
import argparse
import sys

from qpcanet.dataset import ingest, load_images
from qpcanet.experiment import config_from_mapping, run_experiment
from qpcanet.network import MODES


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("root")
    p.add_argument("--modes", default=",".join(MODES))
    p.add_argument("--patches", default="3,5,7")
    p.add_argument("--stages", default="1,2")
    p.add_argument("--filters", default="8")
    p.add_argument("--block", default="8")
    p.add_argument("--overlap", default="0.5")
    p.add_argument("--resize", default="32x32")
    p.add_argument("--train-per-class", default="15")
    p.add_argument("--reps", default="5")
    p.add_argument("--seed", default="0")
    args = p.parse_args(argv)

    height, width = (int(v) for v in args.resize.lower().split("x"))
    manifest = ingest(args.root, resize=(height, width))
    images = load_images([path for path, _ in manifest.entries()], (height, width))
    print("mode,patch,stage,run,accuracy")
    for stages in args.stages.split(","):
        for patch in args.patches.split(","):
            for mode in args.modes.split(","):
                cfg = config_from_mapping({
                    "mode": mode, "stages": stages, "patch": patch, "filters1": args.filters,
                    "filters2": args.filters, "block": args.block, "overlap": args.overlap,
                    "resize": args.resize, "train_per_class": args.train_per_class,
                    "reps": args.reps, "seed": args.seed,
                })
                report = run_experiment(cfg, images, manifest.labels)
                print(report.csv_lines()[-1], flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
