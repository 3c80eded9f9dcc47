"""QPCANet and PCANet forward passes and stage-wise training.

Three modes share one topology:

``qpcanet``
    colour pixels embedded as pure quaternions, quaternion PCA filters;
``rgb_pcanet``
    real PCA over R, G, B patches concatenated into one vector;
``gray_pcanet``
    real PCA over BT.601 luma.

Every stage convolves each incoming map with its bank; the last stage
binarises and hashes the children of each parent map and pools them into
block histograms. Internally quaternion maps are kept component-first,
``(4, m, n)``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np
import scipy.sparse as sp
from scipy import ndimage

from . import kernels
from .errors import NotTrainedError, ShapeError
from .filters import CovarianceAccumulator, QpcaFilterBank, RealFilterBank, bank_from_covariance
from .patches import as_rgb_image, extract_centered_patches, extract_map_patches, to_gray
from .pooling import BlockGrid, block_partition, hash_weight, pool_maps
from .quaternion import left_matrix, qconj

__all__ = [
    "MODES",
    "StageConfig",
    "NetworkConfig",
    "NetworkModel",
    "qconv2d",
    "real_conv2d",
    "quaternion_kernels",
    "feature_dim",
    "forward",
    "extract_features",
    "train_model",
]

log = logging.getLogger(__name__)

MODES = ("qpcanet", "rgb_pcanet", "gray_pcanet")


@dataclass(frozen=True)
class StageConfig:
    k1: int
    k2: int
    L: int


@dataclass(frozen=True)
class NetworkConfig:
    """Architecture and pooling hyperparameters."""

    mode: str = "qpcanet"
    stages: tuple = (StageConfig(3, 3, 8), StageConfig(3, 3, 8))
    block_h: int = 7
    block_w: int = 7
    overlap_ratio: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "stages", tuple(self.stages))
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not self.stages:
            raise ValueError("a network needs at least one stage")
        for idx, st in enumerate(self.stages):
            if st.k1 < 1 or st.k2 < 1 or st.k1 % 2 == 0 or st.k2 % 2 == 0:
                raise ValueError(f"stage {idx + 1}: patch sides must be odd, got {st.k1}x{st.k2}")
            cap = self.patch_dim(idx)
            if not 1 <= st.L <= cap:
                raise ValueError(f"stage {idx + 1}: L={st.L} must lie in [1, {cap}]")
        if self.stages[-1].L > 30:
            raise ValueError("the last stage cannot hash more than 30 maps")
        if not 0.0 <= self.overlap_ratio < 1.0:
            raise ValueError(f"overlap ratio must lie in [0, 1), got {self.overlap_ratio}")
        if self.block_h < 1 or self.block_w < 1:
            raise ValueError("block sides must be positive")

    @property
    def quaternion(self) -> bool:
        return self.mode == "qpcanet"

    def input_channels(self, stage: int) -> int:
        if self.mode == "rgb_pcanet" and stage == 0:
            return 3
        return 1

    def patch_dim(self, stage: int) -> int:
        st = self.stages[stage]
        return st.k1 * st.k2 * self.input_channels(stage)

    def blocks(self, m: int, n: int) -> BlockGrid:
        return block_partition(m, n, self.block_h, self.block_w, self.overlap_ratio)


def feature_dim(config: NetworkConfig, m: int, n: int) -> int:
    """``components * 2^L_last * prod(earlier L) * B`` for an ``m x n`` input."""
    parents = 1
    for st in config.stages[:-1]:
        parents *= st.L
    components = 4 if config.quaternion else 1
    return components * (1 << config.stages[-1].L) * parents * len(config.blocks(m, n))


@dataclass(frozen=True)
class NetworkModel:
    config: NetworkConfig
    banks: tuple = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "banks", tuple(self.banks))
        if self.banks and len(self.banks) != len(self.config.stages):
            raise ShapeError(f"{len(self.banks)} banks for {len(self.config.stages)} stages")
        for idx, (bank, st) in enumerate(zip(self.banks, self.config.stages)):
            expected = (st.k1, st.k2) if self.config.quaternion else (self.config.input_channels(idx), st.k1, st.k2)
            if bank.is_quaternion != self.config.quaternion or tuple(bank.patch_shape) != expected:
                raise ShapeError(f"stage {idx + 1}: bank shape {bank.patch_shape} does not match config {expected}")
            if bank.size != st.L:
                raise ShapeError(f"stage {idx + 1}: bank has {bank.size} filters, config says {st.L}")

    @property
    def trained(self) -> bool:
        return bool(self.banks)


# -- convolution ---------------------------------------------------------------

def quaternion_kernels(filters, centered: bool = False) -> np.ndarray:
    """Real kernels ``(4L, 4, k1, k2)`` realising ``sum conj(w) * Q`` per filter.

    With ``centered=True`` the kernels project mean-removed patches: subtracting
    the window mean from ``Q`` equals subtracting the mean of ``conj(w)`` from
    the kernel.
    """
    filters = np.asarray(filters, dtype=np.float64)
    if filters.ndim == 3:
        filters = filters[None]
    cw = qconj(filters)  # (L, k1, k2, 4)
    if centered:
        cw = cw - cw.mean(axis=(1, 2), keepdims=True)
    mats = left_matrix(cw)  # (L, k1, k2, 4, 4)
    L, k1, k2 = filters.shape[:3]
    return np.ascontiguousarray(mats.transpose(0, 3, 4, 1, 2).reshape(4 * L, 4, k1, k2))


def _check_filter(shape):
    if shape[0] % 2 == 0 or shape[1] % 2 == 0:
        raise ShapeError(f"filter sides must be odd, got {shape[0]}x{shape[1]}")


def qconv2d(pattern, filt) -> np.ndarray:
    """Same-size quaternion cross-correlation with zero padding.

    ``F(y, z) = sum_{u,v} conj(w(u, v)) * Q(y + u - k1//2, z + v - k2//2)``,
    i.e. each output pixel is the quaternion inner product of the filter with
    the patch centred there. ``pattern`` is ``(m, n, 4)``, ``filt`` is
    ``(k1, k2, 4)``.
    """
    q = np.asarray(pattern, dtype=np.float64)
    w = np.asarray(filt, dtype=np.float64)
    if q.ndim != 3 or q.shape[-1] != 4 or w.ndim != 3 or w.shape[-1] != 4:
        raise ShapeError("qconv2d takes an (m, n, 4) map and a (k1, k2, 4) filter")
    _check_filter(w.shape)
    out = kernels.correlate_bank(np.ascontiguousarray(np.moveaxis(q, -1, 0)), quaternion_kernels(w))
    return np.moveaxis(out, 0, -1)


def real_conv2d(pattern, filt) -> np.ndarray:
    """Same-size real cross-correlation with zero padding.

    ``pattern`` is ``(m, n)`` or a channel stack ``(c, m, n)``; ``filt`` is
    ``(k1, k2)`` or ``(c, k1, k2)``; channels are summed into one map.
    """
    x = np.asarray(pattern, dtype=np.float64)
    w = np.asarray(filt, dtype=np.float64)
    if x.ndim == 2:
        x = x[None]
    if w.ndim == 2:
        w = w[None]
    if x.ndim != 3 or w.ndim != 3 or w.shape[0] != x.shape[0]:
        raise ShapeError(f"channel mismatch between map {x.shape} and filter {w.shape}")
    _check_filter(w.shape[1:])
    return kernels.correlate_bank(np.ascontiguousarray(x), np.ascontiguousarray(w[None]))[0]


# -- stage plumbing ------------------------------------------------------------

def _stage_input(config: NetworkConfig, img) -> np.ndarray:
    rgb = as_rgb_image(img)
    if config.mode == "qpcanet":
        out = np.zeros((4,) + rgb.shape[:2])
        out[1:] = np.moveaxis(rgb, -1, 0)
        return out
    if config.mode == "rgb_pcanet":
        return np.ascontiguousarray(np.moveaxis(rgb, -1, 0))
    return to_gray(rgb)[None]


def _bank_kernels(bank) -> np.ndarray:
    if bank.is_quaternion:
        return quaternion_kernels(bank.filters, centered=True)
    w = bank.filters
    return np.ascontiguousarray(w - w.mean(axis=(1, 2, 3), keepdims=True))


def _flat_windows(pattern, k1, k2, per_channel) -> np.ndarray:
    """Pixels whose zero-padded window has an exactly zero mean-removed patch.

    That happens when every channel is constant over the window
    (``per_channel``, quaternion components) or when all channels share one
    constant value (the real modes, which centre the concatenated vector).
    """
    size = (1, k1, k2)
    hi = ndimage.maximum_filter(pattern, size=size, mode="constant", cval=0.0)
    lo = ndimage.minimum_filter(pattern, size=size, mode="constant", cval=0.0)
    if per_channel:
        return np.all(hi == lo, axis=0)
    return hi.max(axis=0) == lo.min(axis=0)


def _apply(pattern, bank, kern) -> np.ndarray:
    """Project every centred patch of ``pattern`` on each filter: ``(L, C, m, n)``.

    The centred kernel sums to zero only up to rounding, so windows whose
    centred patch is exactly zero are set to an exact 0 response; otherwise
    their hash bits would follow the sign of the rounding error.
    """
    out = kernels.correlate_bank(pattern, kern)
    flat = _flat_windows(pattern, *kern.shape[-2:], per_channel=bank.is_quaternion)
    out[:, flat] = 0.0
    if bank.is_quaternion:
        return out.reshape(bank.size, 4, *pattern.shape[1:])
    return out[:, None]


def _patches(config, pattern, st: StageConfig):
    if config.quaternion:
        return extract_centered_patches(np.moveaxis(pattern, 0, -1), st.k1, st.k2)
    return extract_map_patches(pattern, st.k1, st.k2)


def _propagate(config, patterns: Iterable[np.ndarray], banks: Sequence) -> Iterator[np.ndarray]:
    """Push patterns through ``banks`` in order, yielding every output map depth-first."""
    if not banks:
        yield from patterns
        return
    bank, rest = banks[0], banks[1:]
    kern = _bank_kernels(bank)
    for pattern in patterns:
        yield from _propagate(config, iter(_apply(pattern, bank, kern)), rest)


def _hashed_patterns(model: NetworkModel, img) -> np.ndarray:
    config = model.config
    last = model.banks[-1]
    kern = _bank_kernels(last)
    hashed = []
    for parent in _propagate(config, [_stage_input(config, img)], model.banks[:-1]):
        children = _apply(parent, last, kern)  # (L, C, m, n)
        hashed.append(hash_weight(children > 0))
    out = np.concatenate(hashed, axis=0)  # (parents * C, m, n)
    top = (1 << config.stages[-1].L) - 1
    assert out.min() >= 0 and out.max() <= top, "hashed value out of range"
    return out


def _histograms(model: NetworkModel, img) -> np.ndarray:
    if not model.trained:
        raise NotTrainedError("forward pass on an untrained model")
    hashed = _hashed_patterns(model, img)
    counts = pool_maps(hashed, model.config.blocks(*hashed.shape[1:]), model.config.stages[-1].L)
    return counts.reshape(-1)


def forward(model: NetworkModel, img) -> sp.csr_matrix:
    """Feature vector of one RGB image as a ``1 x feature_dim`` sparse row.

    Layout: parent map (stage-1 filter for a two-stage net), then quaternion
    component S, I, J, K (quaternion mode only), then block, then bin.
    """
    dense = _histograms(model, img)
    idx = np.flatnonzero(dense)
    return sp.csr_matrix((dense[idx], idx, np.array([0, len(idx)])), shape=(1, dense.size), dtype=np.int64)


def extract_features(model: NetworkModel, images: Iterable) -> sp.csr_matrix:
    """Stack the feature vectors of ``images`` into an ``N x feature_dim`` CSR matrix."""
    data, indices, indptr = [], [], [0]
    dim = None
    for img in images:
        dense = _histograms(model, img)
        if dim is None:
            dim = dense.size
        elif dense.size != dim:
            raise ShapeError("images of different sizes give features of different dimension")
        idx = np.flatnonzero(dense)
        data.append(dense[idx])
        indices.append(idx)
        indptr.append(indptr[-1] + len(idx))
    if dim is None:
        raise ShapeError("no images to extract features from")
    return sp.csr_matrix(
        (np.concatenate(data), np.concatenate(indices), np.array(indptr)), shape=(len(indptr) - 1, dim), dtype=np.int64
    )


def train_model(config: NetworkConfig, images: Sequence) -> NetworkModel:
    """Learn one filter bank per stage, stage by stage.

    Stage ``s`` is learned from the mean-removed valid patches of every map
    produced by stages ``1..s-1`` over all training images, accumulated in
    image order. Earlier stages are recomputed per image rather than stored.
    """
    images = list(images)
    if not images:
        raise ShapeError("train_model needs at least one training image")
    inputs = [_stage_input(config, img) for img in images]
    banks = []
    for s, st in enumerate(config.stages):
        acc = CovarianceAccumulator()
        for pattern in _propagate(config, iter(inputs), banks):
            acc.add(_patches(config, pattern, st))
        bank = bank_from_covariance(acc.result(), st.L, acc.patch_shape, acc.count)
        log.info("stage %d: %d patches, leading eigenvalue %.4g", s + 1, acc.count, bank.eigenvalues[0])
        banks.append(bank)
    return NetworkModel(config, tuple(banks))
