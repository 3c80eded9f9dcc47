"""Binary hashing of feature maps and block-histogram pooling."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ShapeError

__all__ = [
    "BlockGrid",
    "binarize",
    "hash_weight",
    "block_partition",
    "block_histogram",
    "pool_maps",
    "pool_quaternion",
]


def binarize(feature_map) -> np.ndarray:
    """Heaviside step per quaternion component: 1 where strictly positive, else 0.

    A ``(m, n, 4)`` quaternion map gives ``(4, m, n)`` bit maps ordered
    S, I, J, K. Any other array is binarised element-wise.
    """
    arr = np.asarray(feature_map)
    bits = (arr > 0).astype(np.uint8)
    if arr.ndim == 3 and arr.shape[-1] == 4:
        return np.moveaxis(bits, -1, 0)
    return bits


def hash_weight(binary_stack) -> np.ndarray:
    """Combine ``L`` stacked bit maps into integers ``sum_l 2^(l-1) bit_l``.

    The leading axis of ``binary_stack`` indexes ``l = 1..L``; the result
    drops it and holds values in ``[0, 2^L - 1]``.
    """
    if isinstance(binary_stack, (list, tuple)):
        shapes = {np.shape(b) for b in binary_stack}
        if len(shapes) > 1:
            raise ShapeError(f"bit maps have mismatched shapes {sorted(shapes)}")
    stack = np.asarray(binary_stack)
    if stack.ndim < 2:
        raise ShapeError("hash_weight needs a stack of at least one map")
    L = stack.shape[0]
    if L > 62:
        raise ValueError(f"cannot hash {L} maps into 64-bit integers")
    out = np.zeros(stack.shape[1:], dtype=np.int64)
    for l in range(L):
        out += stack[l].astype(np.int64) << l
    return out


def _starts(dim, block, ratio):
    stride = max(1, int(math.floor(block * (1.0 - ratio) + 1e-9)))
    starts = list(range(0, dim - block + 1, stride))
    if starts[-1] != dim - block:
        starts.append(dim - block)
    return np.array(starts, dtype=np.int64)


@dataclass(frozen=True)
class BlockGrid:
    """Rectangular pooling blocks on a regular (possibly overlapping) grid.

    Iterating yields ``(top, left, height, width)`` rectangles, row-major.
    """

    row_starts: np.ndarray
    col_starts: np.ndarray
    block_h: int
    block_w: int

    def __len__(self):
        return len(self.row_starts) * len(self.col_starts)

    def __iter__(self):
        for r in self.row_starts:
            for c in self.col_starts:
                yield int(r), int(c), self.block_h, self.block_w

    def __getitem__(self, idx):
        q = len(self.col_starts)
        r, c = divmod(idx, q)
        return int(self.row_starts[r]), int(self.col_starts[c]), self.block_h, self.block_w

    @property
    def image_shape(self):
        return int(self.row_starts[-1]) + self.block_h, int(self.col_starts[-1]) + self.block_w


def block_partition(m: int, n: int, block_h: int, block_w: int, overlap_ratio: float) -> BlockGrid:
    """Blocks at stride ``max(1, floor(block * (1 - ratio)))`` along each axis.

    Positions run 0, s, 2s, ... while the block fits; a final block flush
    with the far edge is appended when the grid does not land on it, so
    every pixel is covered.
    """
    if not 0.0 <= overlap_ratio < 1.0:
        raise ValueError(f"overlap ratio must lie in [0, 1), got {overlap_ratio}")
    if block_h < 1 or block_w < 1 or block_h > m or block_w > n:
        raise ShapeError(f"block {block_h}x{block_w} does not fit in a {m}x{n} map")
    return BlockGrid(_starts(m, block_h, overlap_ratio), _starts(n, block_w, overlap_ratio), block_h, block_w)


def pool_maps(values, blocks: BlockGrid, L: int) -> np.ndarray:
    """Block histograms of a stack of integer maps, shape ``(maps, blocks, 2^L)``."""
    values = np.ascontiguousarray(values, dtype=np.int64)
    if values.ndim == 2:
        values = values[None]
    nbins = 1 << L
    if values.size and (values.min() < 0 or values.max() >= nbins):
        raise ValueError(f"hashed values must lie in [0, {nbins - 1}]")
    if blocks.image_shape[0] > values.shape[1] or blocks.image_shape[1] > values.shape[2]:
        raise ShapeError("block grid extends past the map")
    return kernels.block_histograms(
        values, blocks.row_starts, blocks.col_starts, blocks.block_h, blocks.block_w, nbins
    )


def block_histogram(values, blocks: BlockGrid, L: int) -> np.ndarray:
    """Concatenated ``2^L``-bin count histograms of one integer map, length ``2^L * B``."""
    values = np.asarray(values)
    if values.ndim != 2:
        raise ShapeError(f"block_histogram takes one 2-D map, got shape {values.shape}")
    return pool_maps(values, blocks, L).reshape(-1)


def pool_quaternion(hashed, blocks: BlockGrid, L: int) -> np.ndarray:
    """Feature vector of a hashed quaternion pattern ``(4, m, n)``: S, I, J, K histograms."""
    hashed = np.asarray(hashed)
    if hashed.ndim != 3 or hashed.shape[0] != 4:
        raise ShapeError(f"hashed quaternion pattern must have shape (4, m, n), got {hashed.shape}")
    return pool_maps(hashed, blocks, L).reshape(-1)
