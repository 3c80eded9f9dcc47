"""Patch covariance and PCA / quaternion-PCA filter banks."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .linalg import eigh, hermitian_eig
from .patches import PatchMatrix
from .quaternion import MULTIPLICATION_TENSOR

__all__ = [
    "QpcaFilterBank",
    "RealFilterBank",
    "CovarianceAccumulator",
    "covariance",
    "learn_qpca_filters",
    "learn_pca_filters",
    "bank_from_covariance",
]

# coefficient of unit r in e_p * conj(e_q)
_OUTER_TENSOR = MULTIPLICATION_TENSOR * np.array([1.0, -1.0, -1.0, -1.0])[None, None, :]


@dataclass(frozen=True)
class QpcaFilterBank:
    """Leading quaternion eigenvectors of a patch covariance, reshaped to kernels.

    ``filters`` has shape ``(L, k1, k2, 4)``; ``eigenvalues`` is non-increasing.
    """

    filters: np.ndarray
    eigenvalues: np.ndarray

    @property
    def is_quaternion(self) -> bool:
        return True

    @property
    def size(self) -> int:
        return self.filters.shape[0]

    @property
    def patch_shape(self) -> tuple:
        return self.filters.shape[1:3]

    def vectors(self) -> np.ndarray:
        """Filters as columns of a ``(k1 * k2, L, 4)`` quaternion matrix."""
        L = self.size
        return np.ascontiguousarray(self.filters.reshape(L, -1, 4).transpose(1, 0, 2))


@dataclass(frozen=True)
class RealFilterBank:
    """Real PCA filters of shape ``(L, channels, k1, k2)``."""

    filters: np.ndarray
    eigenvalues: np.ndarray

    @property
    def is_quaternion(self) -> bool:
        return False

    @property
    def size(self) -> int:
        return self.filters.shape[0]

    @property
    def patch_shape(self) -> tuple:
        return self.filters.shape[1:]

    def vectors(self) -> np.ndarray:
        return np.ascontiguousarray(self.filters.reshape(self.size, -1).T)


class CovarianceAccumulator:
    """Running sum of patch outer products, reduced in the order patches arrive.

    Quaternion patches accumulate the real Gram matrix of their ``4 * d``
    stacked components; :meth:`result` folds it into the quaternion
    covariance ``sum_t col_t col_t* / count``.
    """

    def __init__(self):
        self._gram = None
        self._patch_shape = None
        self._quaternion = None
        self.count = 0

    def add(self, q: PatchMatrix) -> "CovarianceAccumulator":
        if self._patch_shape is None:
            self._patch_shape = q.patch_shape
            self._quaternion = q.is_quaternion
        elif q.patch_shape != self._patch_shape or q.is_quaternion != self._quaternion:
            raise ShapeError("patch matrices with different shapes fed to one covariance")
        if q.is_quaternion:
            x = np.transpose(q.data, (0, 2, 1)).reshape(q.patch_dim * 4, q.count)
        else:
            x = q.data
        gram = x @ x.T
        self._gram = gram if self._gram is None else self._gram + gram
        self.count += q.count
        return self

    @property
    def patch_shape(self):
        return self._patch_shape

    def result(self) -> np.ndarray:
        if self.count == 0:
            raise ShapeError("covariance of an empty patch matrix")
        g = self._gram / self.count
        if not self._quaternion:
            return g
        d = g.shape[0] // 4
        g = g.reshape(d, 4, d, 4)
        return np.einsum("rpq,apbq->abr", _OUTER_TENSOR, g)


def covariance(q: PatchMatrix) -> np.ndarray:
    """``sum_t col_t col_t* / count`` for a quaternion or real patch matrix."""
    return CovarianceAccumulator().add(q).result()


def bank_from_covariance(sigma, L: int, patch_shape, count: int | None = None):
    """Take the ``L`` leading eigenvectors of ``sigma`` as a filter bank."""
    sigma = np.asarray(sigma)
    quaternion = sigma.ndim == 3
    dim = sigma.shape[0]
    if not 1 <= L <= dim:
        raise ValueError(f"filter count L={L} must lie in [1, {dim}]")
    if count is not None and count < dim:
        warnings.warn(
            f"only {count} patches for a {dim}-dimensional covariance; trailing filters are arbitrary",
            RuntimeWarning,
            stacklevel=3,
        )
    if quaternion:
        result = hermitian_eig(sigma)
        vecs = result.eigenvectors[:, :L, :]  # (d, L, 4)
        filters = np.ascontiguousarray(vecs.transpose(1, 0, 2)).reshape((L,) + tuple(patch_shape) + (4,))
        return QpcaFilterBank(filters, result.eigenvalues[:L].copy())
    values, vectors = eigh(sigma)
    vecs = vectors[:, :L]
    # deterministic sign: largest-magnitude entry positive (lowest index on ties)
    for l in range(L):
        col = vecs[:, l]
        pivot = int(np.flatnonzero(np.abs(col) >= np.abs(col).max() * (1 - 2e-10))[0])
        if col[pivot] < 0:
            vecs[:, l] = -col
    filters = np.ascontiguousarray(vecs.T).reshape((L,) + tuple(patch_shape))
    return RealFilterBank(filters, values[:L].copy())


def learn_qpca_filters(q: PatchMatrix, L: int) -> QpcaFilterBank:
    """Quaternion PCA filters: leading right eigenvectors of the patch covariance."""
    if not q.is_quaternion:
        raise ShapeError("learn_qpca_filters needs quaternion patches")
    return bank_from_covariance(covariance(q), L, q.patch_shape, q.count)


def learn_pca_filters(q: PatchMatrix, L: int) -> RealFilterBank:
    if q.is_quaternion:
        raise ShapeError("learn_pca_filters needs real patches")
    return bank_from_covariance(covariance(q), L, q.patch_shape, q.count)
