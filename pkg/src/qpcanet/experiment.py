"""Experiment configuration and the repeated split/train/evaluate protocol."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .classifier import evaluate_accuracy, train_linear_svm
from .dataset import split_indices
from .errors import QpcaNetError
from .network import NetworkConfig, StageConfig, extract_features, train_model

__all__ = [
    "CONFIG_KEYS",
    "ExperimentConfig",
    "RunResult",
    "Report",
    "parse_config_text",
    "read_config_file",
    "config_from_mapping",
    "run_experiment",
]

log = logging.getLogger(__name__)

CONFIG_KEYS = (
    "mode", "stages", "patch", "filters1", "filters2", "block", "overlap", "resize",
    "train_per_class", "reps", "seed", "svm_c", "svm_epochs",
)

DEFAULTS = {
    "mode": "qpcanet",
    "stages": "2",
    "patch": "3",
    "filters1": "8",
    "filters2": "8",
    "block": "7",
    "overlap": "0.5",
    "resize": "32x32",
    "train_per_class": "15",
    "reps": "1",
    "seed": "0",
    "svm_c": "1.0",
    "svm_epochs": "20",
}


@dataclass(frozen=True)
class ExperimentConfig:
    network: NetworkConfig = field(default_factory=NetworkConfig)
    svm_c: float = 1.0
    svm_epochs: int = 20
    train_per_class: float | int = 15
    repetitions: int = 1
    seed: int = 0
    resize: tuple = (32, 32)

    @property
    def patch_label(self) -> str:
        st = self.network.stages[0]
        return f"{st.k1}x{st.k2}"


def parse_config_text(text: str) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = value
    return out


def read_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _pair(text: str) -> tuple:
    parts = str(text).lower().replace("×", "x").split("x")
    if len(parts) == 1:
        return int(parts[0]), int(parts[0])
    if len(parts) == 2:
        return int(parts[0]), int(parts[1])
    raise ValueError(f"expected N or HxW, got {text!r}")


def _count_or_ratio(text: str):
    value = float(text)
    return int(value) if value >= 1 and value.is_integer() else value


def config_from_mapping(values: Mapping[str, str]) -> ExperimentConfig:
    """Build a config from string values, falling back to defaults for missing keys.

    Keys ``filters3``, ``filters4``, ... are accepted for deeper networks.
    """
    unknown = [k for k in values if k not in CONFIG_KEYS and not (k.startswith("filters") and k[7:].isdigit())]
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
    merged = {**DEFAULTS, **{k: str(v) for k, v in values.items() if v is not None}}
    try:
        n_stages = int(merged["stages"])
        k1, k2 = _pair(merged["patch"])
        stages = tuple(
            StageConfig(k1, k2, int(merged.get(f"filters{s + 1}", merged["filters1"]))) for s in range(n_stages)
        )
        block_h, block_w = _pair(merged["block"])
        network = NetworkConfig(
            mode=merged["mode"],
            stages=stages,
            block_h=block_h,
            block_w=block_w,
            overlap_ratio=float(merged["overlap"]),
        )
        return ExperimentConfig(
            network=network,
            svm_c=float(merged["svm_c"]),
            svm_epochs=int(merged["svm_epochs"]),
            train_per_class=_count_or_ratio(merged["train_per_class"]),
            repetitions=int(merged["reps"]),
            seed=int(merged["seed"]),
            resize=_pair(merged["resize"]),
        )
    except (TypeError, ValueError) as exc:
        raise ValueError(f"invalid configuration: {exc}") from exc


@dataclass(frozen=True)
class RunResult:
    run: int
    seed: int
    accuracy: float
    n_train: int
    n_test: int


@dataclass(frozen=True)
class Report:
    config: ExperimentConfig
    runs: tuple

    @property
    def mean_accuracy(self) -> float:
        return sum(r.accuracy for r in self.runs) / len(self.runs)

    def csv_lines(self) -> list:
        """``mode,patch,stage,run,accuracy`` lines, per run and a final ``mean`` row."""
        cfg = self.config
        prefix = f"{cfg.network.mode},{cfg.patch_label},{len(cfg.network.stages)}"
        lines = ["mode,patch,stage,run,accuracy"]
        lines += [f"{prefix},{r.run},{r.accuracy:.6f}" for r in self.runs]
        lines.append(f"{prefix},mean,{self.mean_accuracy:.6f}")
        return lines

    def csv(self) -> str:
        return "\n".join(self.csv_lines()) + "\n"

    def table(self) -> str:
        cfg = self.config
        title = f"{cfg.network.mode}-{len(cfg.network.stages)}  patch {cfg.patch_label}"
        rows = [title, f"{'run':>5} {'seed':>6} {'train':>6} {'test':>6} {'accuracy':>9}"]
        for r in self.runs:
            rows.append(f"{r.run:>5} {r.seed:>6} {r.n_train:>6} {r.n_test:>6} {100 * r.accuracy:>8.2f}%")
        rows.append(f"{'mean':>5} {'':>6} {'':>6} {'':>6} {100 * self.mean_accuracy:>8.2f}%")
        return "\n".join(rows) + "\n"


def run_experiment(config: ExperimentConfig, images: Sequence, labels: Sequence) -> Report:
    """Average test accuracy over ``config.repetitions`` random splits.

    Run ``r`` uses seed ``config.seed + r`` for the split and the classifier.
    ``images`` are already decoded and resized.
    """
    images = list(images)
    labels = list(labels)
    if config.repetitions < 1:
        raise ValueError("repetitions must be at least 1")
    runs = []
    for r in range(config.repetitions):
        seed = config.seed + r
        train_idx, test_idx = split_indices(labels, config.train_per_class, seed)
        train_imgs = [images[i] for i in train_idx]
        try:
            model = train_model(config.network, train_imgs)
            x_train = extract_features(model, train_imgs)
            x_test = extract_features(model, [images[i] for i in test_idx])
            svm = train_linear_svm(x_train, [labels[i] for i in train_idx], config.svm_c, config.svm_epochs, seed)
            acc = evaluate_accuracy(svm, x_test, [labels[i] for i in test_idx])
        except QpcaNetError as exc:
            # keep the type (it decides the CLI exit code), prefix the run context
            if exc.args:
                exc.args = (f"run {r} (seed {seed}): {exc.args[0]}",) + exc.args[1:]
            raise
        log.info("run %d (seed %d): accuracy %.4f", r, seed, acc)
        runs.append(RunResult(r, seed, acc, len(train_idx), len(test_idx)))
    return Report(config, tuple(runs))
