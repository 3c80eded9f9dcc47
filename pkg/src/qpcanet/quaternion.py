"""Quaternion scalars and vectorised quaternion array arithmetic.

Arrays of quaternions are plain float64 ndarrays whose last axis has length
4 and holds the components ``(s, x, y, z)`` of ``s + x i + y j + z k``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuaternionDomainError, ShapeError

__all__ = [
    "Quaternion",
    "multiply",
    "conjugate",
    "norm_and_inverse",
    "MULTIPLICATION_TENSOR",
    "qmul",
    "qconj",
    "qnorm",
    "qnorm2",
    "left_matrix",
    "as_qarray",
]


def _build_multiplication_tensor():
    # unit products e_p e_q = sign * e_r, indices 0..3 for 1, i, j, k
    table = {
        (0, 0): (1, 0), (0, 1): (1, 1), (0, 2): (1, 2), (0, 3): (1, 3),
        (1, 0): (1, 1), (1, 1): (-1, 0), (1, 2): (1, 3), (1, 3): (-1, 2),
        (2, 0): (1, 2), (2, 1): (-1, 3), (2, 2): (-1, 0), (2, 3): (1, 1),
        (3, 0): (1, 3), (3, 1): (1, 2), (3, 2): (-1, 1), (3, 3): (-1, 0),
    }
    tensor = np.zeros((4, 4, 4))
    for (p, q), (sign, r) in table.items():
        tensor[r, p, q] = sign
    tensor.setflags(write=False)
    return tensor


#: ``MULTIPLICATION_TENSOR[r, p, q]`` is the coefficient of unit ``r`` in
#: the product of units ``p`` and ``q``.
MULTIPLICATION_TENSOR = _build_multiplication_tensor()
_CONJ_SIGNS = np.array([1.0, -1.0, -1.0, -1.0])


def as_qarray(a) -> np.ndarray:
    """Convert ``a`` to a float64 quaternion array, checking the last axis."""
    arr = np.asarray(a, dtype=np.float64)
    if arr.ndim == 0 or arr.shape[-1] != 4:
        raise ShapeError(f"quaternion arrays need a trailing axis of length 4, got shape {arr.shape}")
    return arr


def qmul(a, b) -> np.ndarray:
    """Element-wise Hamilton product of two broadcastable quaternion arrays."""
    a = as_qarray(a)
    b = as_qarray(b)
    a0, a1, a2, a3 = np.moveaxis(a, -1, 0)
    b0, b1, b2, b3 = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
            a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
            a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
            a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0,
        ],
        axis=-1,
    )


def qconj(a) -> np.ndarray:
    return as_qarray(a) * _CONJ_SIGNS


def qnorm2(a) -> np.ndarray:
    a = as_qarray(a)
    return np.einsum("...i,...i->...", a, a)


def qnorm(a) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    return np.hypot(np.hypot(a[..., 0], a[..., 1]), np.hypot(a[..., 2], a[..., 3]))


def left_matrix(a) -> np.ndarray:
    """Real 4x4 matrices ``M`` with ``M @ b == qmul(a, b)`` for every ``b``.

    Works on arrays: the result has shape ``a.shape[:-1] + (4, 4)``.
    """
    a = as_qarray(a)
    return np.einsum("rpq,...p->...rq", MULTIPLICATION_TENSOR, a)


@dataclass(frozen=True)
class Quaternion:
    """An immutable quaternion ``s + x i + y j + z k`` with finite components."""

    s: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        for name in ("s", "x", "y", "z"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise QuaternionDomainError(f"quaternion component {name} is not finite: {value}")
            object.__setattr__(self, name, value)

    @classmethod
    def from_array(cls, a) -> "Quaternion":
        s, x, y, z = as_qarray(a).reshape(4)
        return cls(s, x, y, z)

    def to_array(self) -> np.ndarray:
        return np.array([self.s, self.x, self.y, self.z])

    @property
    def is_pure(self) -> bool:
        return self.s == 0.0

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return multiply(self, other)
        if isinstance(other, (int, float)):
            return Quaternion(self.s * other, self.x * other, self.y * other, self.z * other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            return self * other
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.s + other.s, self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other):
        if not isinstance(other, Quaternion):
            return NotImplemented
        return Quaternion(self.s - other.s, self.x - other.x, self.y - other.y, self.z - other.z)

    def __neg__(self):
        return Quaternion(-self.s, -self.x, -self.y, -self.z)

    def conjugate(self) -> "Quaternion":
        return conjugate(self)

    def norm(self) -> float:
        return math.hypot(self.s, self.x, self.y, self.z)

    def inverse(self) -> "Quaternion":
        return norm_and_inverse(self)[1]

    def __repr__(self):
        return f"Quaternion({self.s!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def multiply(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product ``a * b`` (not commutative)."""
    return Quaternion(
        a.s * b.s - a.x * b.x - a.y * b.y - a.z * b.z,
        a.s * b.x + a.x * b.s + a.y * b.z - a.z * b.y,
        a.s * b.y - a.x * b.z + a.y * b.s + a.z * b.x,
        a.s * b.z + a.x * b.y - a.y * b.x + a.z * b.s,
    )


def conjugate(a: Quaternion) -> Quaternion:
    return Quaternion(a.s, -a.x, -a.y, -a.z)


def norm_and_inverse(a: Quaternion) -> tuple[float, Quaternion]:
    """Return ``(||a||, a^-1)`` where ``a^-1 = conj(a) / ||a||^2``.

    Raises
    ------
    QuaternionDomainError
        If ``a`` is the zero quaternion ("non-invertible").
    """
    n = a.norm()
    if n == 0.0:
        raise QuaternionDomainError("zero quaternion is non-invertible")
    # divide twice rather than by n**2, which underflows for tiny entries
    return n, Quaternion(a.s / n / n, -a.x / n / n, -a.y / n / n, -a.z / n / n)
