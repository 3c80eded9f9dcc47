"""Image-tree ingestion, decoding and seeded train/test splits.

A dataset root holds one directory per class containing PNG, JPEG or BMP
files. Grey-level files are dropped with a warning; everything else is
converted to RGB, scaled to ``[0, 1]`` and bilinearly resized.
"""
from __future__ import annotations

import json
import logging
import os
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DataError

__all__ = [
    "IMAGE_EXTENSIONS",
    "DatasetManifest",
    "ingest",
    "load_image",
    "load_images",
    "resize_image",
    "split_indices",
    "split",
    "save_manifest",
    "load_manifest",
]

log = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")
_GRAY_MODES = {"1", "L", "LA", "I", "I;16", "I;16B", "I;16L", "F", "La"}


@dataclass
class DatasetManifest:
    root: str
    classes: dict  # class name -> list of image paths, both sorted
    resize: tuple = (32, 32)
    split: float | int | None = None
    seed: int = 0
    skipped: list = field(default_factory=list)  # (path, reason)

    def entries(self):
        """Flat ``(path, label)`` list in class order, then path order."""
        return [(p, c) for c in self.classes for p in self.classes[c]]

    @property
    def labels(self):
        return [c for c in self.classes for _ in self.classes[c]]

    def __len__(self):
        return sum(len(v) for v in self.classes.values())


def resize_image(img, size) -> np.ndarray:
    """Bilinear resize of a float ``(h, w, 3)`` image to ``size = (height, width)``."""
    img = np.asarray(img, dtype=np.float64)
    height, width = size
    if img.shape[:2] == (height, width):
        return img.copy()
    channels = []
    for c in range(img.shape[2]):
        band = Image.fromarray(np.ascontiguousarray(img[..., c], dtype=np.float32), mode="F")
        channels.append(np.asarray(band.resize((width, height), Image.BILINEAR), dtype=np.float64))
    return np.clip(np.stack(channels, axis=-1), 0.0, 1.0)


def _open_rgb(path):
    """Decode ``path``; return ``(array in [0, 1], None)`` or ``(None, reason)``."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in _GRAY_MODES:
                return None, f"grey-level image (mode {im.mode})"
            if im.mode == "P" and im.palette is not None and im.palette.mode in _GRAY_MODES:
                return None, "grey-level palette image"
            rgb = im.convert("RGB")
    except (UnidentifiedImageError, OSError) as exc:
        return None, f"unreadable: {exc}"
    return np.asarray(rgb, dtype=np.float64) / 255.0, None


def load_image(path, resize=None) -> np.ndarray:
    img, reason = _open_rgb(path)
    if img is None:
        raise DataError(f"{path}: {reason}")
    return resize_image(img, resize) if resize is not None else img


def load_images(paths: Sequence[str], resize) -> list:
    return [load_image(p, resize) for p in paths]


def ingest(root, resize=(32, 32)) -> DatasetManifest:
    """Scan ``root/<class>/<image>`` and keep every decodable colour image.

    Raises
    ------
    DataError
        If ``root`` is not a readable directory or fewer than two classes
        keep at least one image.
    """
    root = os.fspath(root)
    if not os.path.isdir(root):
        raise DataError(f"dataset root {root!r} is not a directory")
    classes = {}
    skipped = []
    for name in sorted(os.listdir(root)):
        class_dir = os.path.join(root, name)
        if not os.path.isdir(class_dir):
            continue
        kept = []
        for fname in sorted(os.listdir(class_dir)):
            if os.path.splitext(fname)[1].lower() not in IMAGE_EXTENSIONS:
                continue
            path = os.path.join(class_dir, fname)
            img, reason = _open_rgb(path)
            if img is None:
                warnings.warn(f"skipping {path}: {reason}", RuntimeWarning, stacklevel=2)
                skipped.append((path, reason))
                continue
            kept.append(path)
        if kept:
            classes[name] = kept
        else:
            warnings.warn(f"class {name!r} has no usable images", RuntimeWarning, stacklevel=2)
    total = sum(len(v) for v in classes.values())
    log.info("ingested %d images in %d classes from %s (%d skipped)", total, len(classes), root, len(skipped))
    if len(classes) < 2:
        raise DataError(f"{root!r} has {len(classes)} usable classes; at least two are required")
    return DatasetManifest(root, classes, tuple(resize), skipped=skipped)


def _train_count(size, per_class_train):
    if isinstance(per_class_train, float) and 0.0 < per_class_train < 1.0:
        return max(1, int(round(per_class_train * size)))
    if float(per_class_train) != int(per_class_train):
        raise DataError(f"train split must be a count or a ratio in (0, 1), got {per_class_train}")
    return int(per_class_train)


def split_indices(labels: Sequence, per_class_train, seed: int):
    """Seeded per-class shuffle; the first ``per_class_train`` of each class train.

    ``per_class_train`` is a count, or a ratio in ``(0, 1)``. Classes are
    visited in sorted order from one generator, so the split is a pure
    function of ``(labels, per_class_train, seed)``. Returns sorted index
    lists ``(train, test)``.
    """
    by_class = {}
    for idx, label in enumerate(labels):
        by_class.setdefault(label, []).append(idx)
    if not by_class:
        raise DataError("cannot split an empty dataset")
    rng = np.random.default_rng(seed)
    train, test = [], []
    for label in sorted(by_class):
        members = np.array(by_class[label])
        count = _train_count(len(members), per_class_train)
        if not 0 < count < len(members):
            raise DataError(
                f"class {label!r} has {len(members)} images; cannot train on {count} and keep a test image"
            )
        perm = rng.permutation(len(members))
        train.extend(members[perm[:count]].tolist())
        test.extend(members[perm[count:]].tolist())
    return sorted(train), sorted(test)


def split(manifest: DatasetManifest, per_class_train, seed: int):
    """``(train, test)`` lists of ``(path, label)`` entries."""
    entries = manifest.entries()
    train, test = split_indices([label for _, label in entries], per_class_train, seed)
    return [entries[i] for i in train], [entries[i] for i in test]


def save_manifest(manifest: DatasetManifest, path) -> None:
    doc = {
        "root": manifest.root,
        "resize": list(manifest.resize),
        "split": manifest.split,
        "seed": manifest.seed,
        "classes": manifest.classes,
        "skipped": [list(s) for s in manifest.skipped],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)


def load_manifest(path) -> DatasetManifest:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
        return DatasetManifest(
            doc["root"],
            {k: list(v) for k, v in doc["classes"].items()},
            tuple(doc["resize"]),
            doc.get("split"),
            doc.get("seed", 0),
            [tuple(s) for s in doc.get("skipped", [])],
        )
    except (OSError, ValueError, KeyError) as exc:
        raise DataError(f"cannot read manifest {path}: {exc}") from exc
