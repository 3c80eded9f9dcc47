"""Binary model files.

Layout (all integers and floats little-endian)::

    magic      4s   b"QPCN"
    version    u16
    mode       u8   0 qpcanet, 1 rgb_pcanet, 2 gray_pcanet
    has_svm    u8
    stages     u32
    per stage  u32 k1, u32 k2, u32 L, u32 channels
    pooling    u32 block_h, u32 block_w, f64 overlap_ratio
    per stage  f64[L * k1 * k2 * 4]      quaternion filters, entries (s, x, y, z),
               or f64[L * channels * k1 * k2]  real filters, row-major
               f64[L]                    eigenvalues
    if has_svm:
      u32 classes; per class u32 nbytes + UTF-8 label
      u64 dim; f64[classes * dim] weights; f64[classes] bias
      f64 C; u32 epochs; i64 seed

Class labels are stored as text.
"""
from __future__ import annotations

import struct

import numpy as np

from .classifier import LinearModel
from .errors import ModelFormatError
from .filters import QpcaFilterBank, RealFilterBank
from .network import MODES, NetworkConfig, NetworkModel, StageConfig

__all__ = ["MAGIC", "VERSION", "save_model", "load_model", "dumps_model", "loads_model"]

MAGIC = b"QPCN"
VERSION = 1


def _f64(arr) -> bytes:
    return np.ascontiguousarray(arr, dtype="<f8").tobytes()


def dumps_model(network: NetworkModel, classifier: LinearModel | None = None) -> bytes:
    if not network.trained:
        raise ValueError("only trained models can be saved")
    cfg = network.config
    out = [MAGIC, struct.pack("<HBBI", VERSION, MODES.index(cfg.mode), classifier is not None, len(cfg.stages))]
    for idx, st in enumerate(cfg.stages):
        channels = 4 if cfg.quaternion else cfg.input_channels(idx)
        out.append(struct.pack("<IIII", st.k1, st.k2, st.L, channels))
    out.append(struct.pack("<IId", cfg.block_h, cfg.block_w, cfg.overlap_ratio))
    for bank in network.banks:
        out.append(_f64(bank.filters))
        out.append(_f64(bank.eigenvalues))
    if classifier is not None:
        out.append(struct.pack("<I", len(classifier.classes)))
        for label in classifier.classes:
            raw = str(label).encode("utf-8")
            out.append(struct.pack("<I", len(raw)) + raw)
        out.append(struct.pack("<Q", classifier.dim))
        out.append(_f64(classifier.weights))
        out.append(_f64(classifier.bias))
        out.append(struct.pack("<dIq", classifier.C, classifier.epochs, classifier.seed))
    return b"".join(out)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, nbytes: int) -> bytes:
        if self.pos + nbytes > len(self.buf):
            raise ModelFormatError(f"model file truncated at byte {len(self.buf)} (needed {self.pos + nbytes})")
        chunk = self.buf[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def floats(self, count: int) -> np.ndarray:
        return np.frombuffer(self.take(8 * count), dtype="<f8").astype(np.float64)


def loads_model(buf: bytes):
    """Parse bytes written by :func:`dumps_model`; returns ``(network, classifier_or_None)``."""
    r = _Reader(buf)
    if r.take(4) != MAGIC:
        raise ModelFormatError("not a QPCN model file (bad magic)")
    version, mode_code, has_svm, n_stages = r.unpack("<HBBI")
    if version != VERSION:
        raise ModelFormatError(f"unsupported model format version {version} (expected {VERSION})")
    if mode_code >= len(MODES) or n_stages < 1:
        raise ModelFormatError("corrupt model header")
    mode = MODES[mode_code]
    shapes = [r.unpack("<IIII") for _ in range(n_stages)]
    block_h, block_w, overlap = r.unpack("<IId")
    try:
        config = NetworkConfig(
            mode=mode,
            stages=tuple(StageConfig(k1, k2, L) for k1, k2, L, _ in shapes),
            block_h=block_h,
            block_w=block_w,
            overlap_ratio=overlap,
        )
    except ValueError as exc:
        raise ModelFormatError(f"corrupt model configuration: {exc}") from exc
    banks = []
    for k1, k2, L, channels in shapes:
        if config.quaternion:
            filters = r.floats(L * k1 * k2 * 4).reshape(L, k1, k2, 4)
            banks.append(QpcaFilterBank(filters, r.floats(L)))
        else:
            filters = r.floats(L * channels * k1 * k2).reshape(L, channels, k1, k2)
            banks.append(RealFilterBank(filters, r.floats(L)))
    try:
        network = NetworkModel(config, tuple(banks))
    except ValueError as exc:
        raise ModelFormatError(f"corrupt filter banks: {exc}") from exc
    classifier = None
    if has_svm:
        (n_classes,) = r.unpack("<I")
        labels = []
        for _ in range(n_classes):
            (nbytes,) = r.unpack("<I")
            try:
                labels.append(r.take(nbytes).decode("utf-8"))
            except UnicodeDecodeError as exc:
                raise ModelFormatError("corrupt class label") from exc
        (dim,) = r.unpack("<Q")
        weights = r.floats(n_classes * dim).reshape(n_classes, dim)
        bias = r.floats(n_classes)
        C, epochs, seed = r.unpack("<dIq")
        classifier = LinearModel(tuple(labels), weights, bias, C, epochs, seed)
    if r.pos != len(buf):
        raise ModelFormatError(f"{len(buf) - r.pos} trailing bytes after model data")
    return network, classifier


def save_model(path, network: NetworkModel, classifier: LinearModel | None = None) -> None:
    data = dumps_model(network, classifier)
    with open(path, "wb") as fh:
        fh.write(data)


def load_model(path):
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ModelFormatError(f"cannot read model file {path}: {exc}") from exc
    return loads_model(data)
