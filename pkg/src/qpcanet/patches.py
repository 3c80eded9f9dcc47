"""Colour embedding and mean-removed patch extraction.

Images are float arrays ``(height, width, 3)`` with channels in ``[0, 1]``.
Quaternion images are ``(height, width, 4)`` arrays. Patch matrices store one
patch per column: ``(patch_dim, count, 4)`` for quaternion data and
``(patch_dim, count)`` for real data. Patches are vectorised row-major and
columns follow the raster order of patch top-left corners.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ShapeError

__all__ = [
    "LUMA_WEIGHTS",
    "PatchMatrix",
    "as_rgb_image",
    "to_quaternion_image",
    "to_gray",
    "extract_centered_patches",
    "extract_real_patches",
    "extract_map_patches",
    "assemble_patch_matrix",
    "patch_count",
]

#: ITU-R BT.601 luma weights for R, G, B.
LUMA_WEIGHTS = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class PatchMatrix:
    """Patch vectors as columns.

    ``patch_shape`` is ``(k1, k2)`` for quaternion patches and
    ``(channels, k1, k2)`` for real ones; it is what filters reshape to.
    """

    data: np.ndarray
    patch_shape: tuple

    @property
    def is_quaternion(self) -> bool:
        return self.data.ndim == 3

    @property
    def patch_dim(self) -> int:
        return self.data.shape[0]

    @property
    def count(self) -> int:
        return self.data.shape[1]


def as_rgb_image(img) -> np.ndarray:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"RGB image must have shape (height, width, 3), got {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise ValueError("RGB channels must be finite and lie in [0, 1]")
    return arr


def to_quaternion_image(img) -> np.ndarray:
    """Embed colour pixel ``(r, g, b)`` as the pure quaternion ``r i + g j + b k``."""
    rgb = as_rgb_image(img)
    out = np.zeros(rgb.shape[:2] + (4,))
    out[..., 1:] = rgb
    return out


def to_gray(img) -> np.ndarray:
    return as_rgb_image(img) @ LUMA_WEIGHTS


def patch_count(m: int, n: int, k1: int, k2: int) -> int:
    return (m - k1 + 1) * (n - k2 + 1)


def _check_patch_shape(m, n, k1, k2):
    if k1 < 1 or k2 < 1 or k1 % 2 == 0 or k2 % 2 == 0:
        raise ShapeError(f"patch sides must be positive odd integers, got {k1}x{k2}")
    if k1 > m or k2 > n:
        raise ShapeError(f"patch {k1}x{k2} is larger than the {m}x{n} input")


def _windows(maps, k1, k2):
    # maps (c, m, n) -> (count, c * k1 * k2), channel-major then row-major
    c = maps.shape[0]
    win = sliding_window_view(maps, (k1, k2), axis=(1, 2))  # (c, m', n', k1, k2)
    win = np.moveaxis(win, 0, 2)  # (m', n', c, k1, k2)
    return win.reshape(-1, c * k1 * k2)


def _center(cols, axis):
    # shifting by one entry first keeps constant patches exactly zero
    shifted = cols - np.take(cols, [0], axis=axis)
    return shifted - shifted.mean(axis=axis, keepdims=True)


def extract_centered_patches(pattern, k1: int, k2: int) -> PatchMatrix:
    """All stride-1 ``k1 x k2`` patches of a quaternion map, each minus its mean.

    The mean is taken separately for each of the four quaternion components.
    """
    q = np.asarray(pattern, dtype=np.float64)
    if q.ndim != 3 or q.shape[2] != 4:
        raise ShapeError(f"quaternion map must have shape (m, n, 4), got {q.shape}")
    m, n, _ = q.shape
    _check_patch_shape(m, n, k1, k2)
    cols = _windows(np.moveaxis(q, -1, 0), k1, k2).reshape(-1, 4, k1 * k2)
    cols = _center(cols, axis=2)
    return PatchMatrix(np.ascontiguousarray(np.transpose(cols, (2, 0, 1))), (k1, k2))


def extract_map_patches(maps, k1: int, k2: int) -> PatchMatrix:
    """Mean-removed patches of a real ``(c, m, n)`` stack, channels concatenated.

    One mean is removed per patch over the whole ``c * k1 * k2`` vector.
    """
    maps = np.asarray(maps, dtype=np.float64)
    if maps.ndim == 2:
        maps = maps[None]
    if maps.ndim != 3:
        raise ShapeError(f"real maps must have shape (c, m, n), got {maps.shape}")
    c, m, n = maps.shape
    _check_patch_shape(m, n, k1, k2)
    cols = _center(_windows(maps, k1, k2), axis=1)
    return PatchMatrix(np.ascontiguousarray(cols.T), (c, k1, k2))


def extract_real_patches(img, mode: str, k1: int, k2: int) -> PatchMatrix:
    """Baseline patches: ``gray`` (luma) or ``rgb_concat`` (R, G, B stacked)."""
    if mode == "gray":
        maps = to_gray(img)[None]
    elif mode == "rgb_concat":
        maps = np.moveaxis(as_rgb_image(img), -1, 0)
    else:
        raise ValueError(f"unknown real patch mode {mode!r}")
    return extract_map_patches(maps, k1, k2)


def assemble_patch_matrix(per_image: Sequence[PatchMatrix]) -> PatchMatrix:
    if not per_image:
        raise ShapeError("no patch matrices to assemble")
    first = per_image[0]
    for pm in per_image[1:]:
        if pm.patch_shape != first.patch_shape or pm.data.ndim != first.data.ndim:
            raise ShapeError("patch matrices disagree in patch dimension or kind")
    if len(per_image) == 1:
        return first
    return PatchMatrix(np.concatenate([pm.data for pm in per_image], axis=1), first.patch_shape)
