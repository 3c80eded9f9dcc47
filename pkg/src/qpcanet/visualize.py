"""PNG dumps of learned filter banks."""
from __future__ import annotations

import os

import numpy as np
from PIL import Image

from .network import NetworkModel

__all__ = ["scale_tile", "filter_strips", "dump_filters"]

QUATERNION_PARTS = ("real", "i", "j", "k")
RGB_PARTS = ("r", "g", "b")


def scale_tile(tile) -> np.ndarray:
    """Min-max scale to ``[0, 1]``; a constant tile maps to 0.5."""
    tile = np.asarray(tile, dtype=np.float64)
    lo, hi = tile.min(), tile.max()
    if hi == lo:
        return np.full(tile.shape, 0.5)
    return (tile - lo) / (hi - lo)


def filter_strips(model: NetworkModel):
    """``{(stage, part): strip}`` with one scaled ``k1 x (L * k2)`` strip per filter component."""
    strips = {}
    for s, bank in enumerate(model.banks, start=1):
        f = bank.filters
        if bank.is_quaternion:
            parts = [(name, f[..., c]) for c, name in enumerate(QUATERNION_PARTS)]
        elif f.shape[1] == 3:
            parts = [(name, f[:, c]) for c, name in enumerate(RGB_PARTS)]
        else:
            parts = [("gray", f[:, 0])]
        for name, tiles in parts:
            strips[(s, name)] = np.concatenate([scale_tile(t) for t in tiles], axis=1)
    return strips


def dump_filters(model: NetworkModel, out_dir, zoom: int = 16) -> list:
    """Write one grey-scale PNG strip per stage and filter component.

    Quaternion stages give four strips (real part, i, j, k), the first RGB
    baseline stage gives three (r, g, b), other real stages one. Every tile
    is min-max scaled on its own and magnified ``zoom`` times with nearest
    neighbour sampling. Returns the written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for (stage, part), strip in filter_strips(model).items():
        pixels = np.rint(strip * 255.0).astype(np.uint8)
        if zoom > 1:
            pixels = np.kron(pixels, np.ones((zoom, zoom), dtype=np.uint8))
        path = os.path.join(out_dir, f"stage{stage}_{part}.png")
        Image.fromarray(pixels, mode="L").save(path)
        paths.append(path)
    return paths
