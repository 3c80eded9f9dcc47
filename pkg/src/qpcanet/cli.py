"""Command-line interface: ``qpcanet <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import __version__
from .classifier import evaluate_accuracy, predict_labels, train_linear_svm
from .dataset import ingest, load_image, load_images, load_manifest, save_manifest, split
from .errors import DataError, NumericalError, QpcaNetError
from .experiment import config_from_mapping, read_config_file, run_experiment
from .io import load_model, save_model
from .network import extract_features, train_model
from .visualize import dump_filters

log = logging.getLogger("qpcanet")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3

# flag name -> config key
_OVERRIDES = {
    "mode": "mode",
    "stages": "stages",
    "patch": "patch",
    "filters1": "filters1",
    "filters2": "filters2",
    "block": "block",
    "overlap": "overlap",
    "resize": "resize",
    "train_per_class": "train_per_class",
    "reps": "reps",
    "seed": "seed",
    "svm_c": "svm_c",
    "svm_epochs": "svm_epochs",
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _add_config_flags(p):
    p.add_argument("--config", help="key=value configuration file; flags override it")
    g = p.add_argument_group("configuration overrides")
    g.add_argument("--mode", choices=("qpcanet", "rgb_pcanet", "gray_pcanet"))
    g.add_argument("--stages")
    g.add_argument("--patch", help="odd patch side N or KxK")
    g.add_argument("--filters1", help="filters in stage 1")
    g.add_argument("--filters2", help="filters in stage 2")
    g.add_argument("--block", help="pooling block N or HxW")
    g.add_argument("--overlap", help="block overlap ratio in [0, 1)")
    g.add_argument("--resize", help="image size HxW")
    g.add_argument("--train-per-class", dest="train_per_class", help="training images per class (count or ratio)")
    g.add_argument("--reps")
    g.add_argument("--seed")
    g.add_argument("--svm-c", dest="svm_c")
    g.add_argument("--svm-epochs", dest="svm_epochs")


def _experiment_config(args, manifest=None):
    values = read_config_file(args.config) if getattr(args, "config", None) else {}
    if manifest is not None and "resize" not in values:
        values["resize"] = f"{manifest.resize[0]}x{manifest.resize[1]}"
    for flag, key in _OVERRIDES.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[key] = value
    return config_from_mapping(values)


def _manifest(args):
    if getattr(args, "manifest", None):
        return load_manifest(args.manifest)
    if getattr(args, "root", None):
        return ingest(args.root, resize=(32, 32))
    raise UsageError("give --manifest or --root")


def _load_split(manifest, cfg, which):
    train, test = split(manifest, cfg.train_per_class, cfg.seed)
    entries = {"train": train, "test": test, "all": manifest.entries()}[which]
    paths = [p for p, _ in entries]
    return load_images(paths, cfg.resize), [label for _, label in entries], paths


def cmd_ingest(args):
    resize = _parse_size(args.resize)
    manifest = ingest(args.root, resize=resize)
    save_manifest(manifest, args.output)
    for name, paths in manifest.classes.items():
        print(f"{name}\t{len(paths)}")
    print(f"{len(manifest)} images in {len(manifest.classes)} classes, {len(manifest.skipped)} skipped -> {args.output}")


def cmd_train(args):
    manifest = _manifest(args)
    cfg = _experiment_config(args, manifest)
    images, labels, _ = _load_split(manifest, cfg, "train")
    network = train_model(cfg.network, images)
    features = extract_features(network, images)
    svm = train_linear_svm(features, labels, cfg.svm_c, cfg.svm_epochs, cfg.seed)
    save_model(args.output, network, svm)
    acc = evaluate_accuracy(svm, features, labels)
    print(f"trained {cfg.network.mode} on {len(images)} images, training accuracy {acc:.4f} -> {args.output}")


def cmd_extract(args):
    network, _ = load_model(args.model)
    if args.manifest:
        manifest = load_manifest(args.manifest)
        resize = _parse_size(args.resize) if args.resize else manifest.resize
        entries = manifest.entries()
    else:
        resize = _parse_size(args.resize or "32x32")
        entries = [(p, "") for p in args.images]
    if not entries:
        raise UsageError("no images given")
    x = extract_features(network, (load_image(p, resize) for p, _ in entries))
    np.savez_compressed(
        args.output,
        data=x.data,
        indices=x.indices,
        indptr=x.indptr,
        shape=np.array(x.shape),
        labels=np.array([label for _, label in entries]),
        paths=np.array([p for p, _ in entries]),
    )
    print(f"{x.shape[0]} feature vectors of dimension {x.shape[1]} -> {args.output}")


def cmd_classify(args):
    network, svm = load_model(args.model)
    if svm is None:
        raise DataError(f"{args.model} has no classifier")
    resize = _parse_size(args.resize)
    x = extract_features(network, (load_image(p, resize) for p in args.images))
    for path, label in zip(args.images, predict_labels(svm, x)):
        print(f"{path}\t{label}")


def cmd_evaluate(args):
    network, svm = load_model(args.model)
    if svm is None:
        raise DataError(f"{args.model} has no classifier")
    manifest = load_manifest(args.manifest)
    cfg = _experiment_config(args, manifest)
    images, labels, _ = _load_split(manifest, cfg, "all" if args.all else "test")
    acc = evaluate_accuracy(svm, extract_features(network, images), labels)
    print(f"accuracy {acc:.6f} on {len(labels)} images")


def cmd_run(args):
    manifest = _manifest(args)
    cfg = _experiment_config(args, manifest)
    images = load_images([p for p, _ in manifest.entries()], cfg.resize)
    report = run_experiment(cfg, images, manifest.labels)
    sys.stdout.write(report.table())
    sys.stdout.write(report.csv())
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(report.csv())


def cmd_dump_filters(args):
    network, _ = load_model(args.model)
    for path in dump_filters(network, args.output, zoom=args.zoom):
        print(path)


def _parse_size(text):
    parts = str(text).lower().split("x")
    try:
        if len(parts) == 1:
            return int(parts[0]), int(parts[0])
        h, w = (int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad size {text!r}; expected HxW") from exc
    return h, w


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qpcanet", description="Quaternion PCA network for colour image classification")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="scan an image tree root/<class>/<image> into a manifest")
    p.add_argument("root")
    p.add_argument("--resize", default="32x32")
    p.add_argument("-o", "--output", default="manifest.json")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="train filter banks and the SVM on the training split")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest")
    src.add_argument("--root")
    _add_config_flags(p)
    p.add_argument("-o", "--output", default="model.qpcn")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extract", help="write feature vectors to a .npz file")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest")
    p.add_argument("--resize")
    p.add_argument("images", nargs="*")
    p.add_argument("-o", "--output", default="features.npz")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("classify", help="predict labels for image files")
    p.add_argument("--model", required=True)
    p.add_argument("--resize", default="32x32")
    p.add_argument("images", nargs="+")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", help="accuracy of a saved model on the test split of a manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--all", action="store_true", help="evaluate on every image instead of the test split")
    _add_config_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run", help="repeated split / train / evaluate experiment")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--manifest")
    src.add_argument("--root")
    _add_config_flags(p)
    p.add_argument("-o", "--output", help="also write the CSV report here")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dump-filters", help="render learned filters as PNG strips")
    p.add_argument("--model", required=True)
    p.add_argument("-o", "--output", default="filters")
    p.add_argument("--zoom", type=int, default=16)
    p.set_defaults(func=cmd_dump_filters)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"qpcanet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except UsageError as exc:
        print(f"qpcanet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"qpcanet: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (DataError, OSError) as exc:
        print(f"qpcanet: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (QpcaNetError, ValueError) as exc:
        # remaining library errors are argument/configuration problems
        print(f"qpcanet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
