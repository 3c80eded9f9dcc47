"""Quaternion matrices and the Hermitian quaternion eigendecomposition.

A quaternion matrix is a float64 array of shape ``(rows, cols, 4)``.
The eigendecomposition embeds the matrix into a complex matrix of twice the
size (the complex adjoint), diagonalises that with an in-repo Hermitian
solver (Householder tridiagonalisation followed by implicit-shift QL), and
reassembles quaternion eigenvectors from the complex ones.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NotHermitianError, NumericalError, QuaternionDomainError, ShapeError
from .quaternion import MULTIPLICATION_TENSOR, as_qarray, qconj, qmul, qnorm2

__all__ = [
    "HermEigResult",
    "as_qmatrix",
    "qidentity",
    "conj_transpose",
    "matmul",
    "complex_adjoint",
    "from_complex_adjoint",
    "eigh",
    "hermitian_eig",
    "canonicalize_eigvec",
    "qinner",
    "frobenius_norm",
]

HERMITIAN_RTOL = 1e-9
_CLUSTER_RTOL = 1e-10
_TIE_RTOL = 1e-10


def as_qmatrix(a) -> np.ndarray:
    arr = as_qarray(a)
    if arr.ndim != 3:
        raise ShapeError(f"expected a quaternion matrix of shape (rows, cols, 4), got {arr.shape}")
    return arr


def qidentity(n: int) -> np.ndarray:
    eye = np.zeros((n, n, 4))
    eye[np.arange(n), np.arange(n), 0] = 1.0
    return eye


def conj_transpose(a) -> np.ndarray:
    """``(A*)[i, j] = conj(A[j, i])``."""
    return qconj(np.swapaxes(as_qmatrix(a), 0, 1))


def matmul(a, b) -> np.ndarray:
    """Quaternion matrix product; each term is ``A[i, t] * B[t, j]`` in that order."""
    a = as_qmatrix(a)
    b = as_qmatrix(b)
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply {a.shape[:2]} by {b.shape[:2]}")
    return np.einsum("rpq,ikp,kjq->ijr", MULTIPLICATION_TENSOR, a, b)


def frobenius_norm(a) -> float:
    return float(np.sqrt(np.sum(np.asarray(a, dtype=np.float64) ** 2)))


def qinner(a, b) -> np.ndarray:
    """Quaternion inner product ``<a, b> = sum_r conj(a_r) * b_r`` of two vectors ``(n, 4)``."""
    return qmul(qconj(a), b).sum(axis=0)


def complex_adjoint(a) -> np.ndarray:
    """Embed a quaternion matrix as a ``2r x 2c`` complex matrix.

    Entry ``s + x i + y j + z k`` becomes the block
    ``[[s + x i, y + z i], [-y + z i, s - x i]]`` at rows ``2r:2r+2`` and
    columns ``2c:2c+2``. The map is a ring homomorphism and sends the
    quaternion conjugate transpose to the complex one.
    """
    a = as_qmatrix(a)
    r, c, _ = a.shape
    s, x, y, z = np.moveaxis(a, -1, 0)
    out = np.empty((2 * r, 2 * c), dtype=np.complex128)
    out[0::2, 0::2] = s + 1j * x
    out[0::2, 1::2] = y + 1j * z
    out[1::2, 0::2] = -y + 1j * z
    out[1::2, 1::2] = s - 1j * x
    return out


def from_complex_adjoint(m) -> np.ndarray:
    """Inverse of :func:`complex_adjoint` (reads the first row of each block)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] % 2 or m.shape[1] % 2:
        raise ShapeError(f"complex adjoint must have even dimensions, got {m.shape}")
    top_left = m[0::2, 0::2]
    top_right = m[0::2, 1::2]
    return np.stack([top_left.real, top_left.imag, top_right.real, top_right.imag], axis=-1)


def _tridiagonalize(a):
    """Householder reduction ``a = Q T Q^H`` with ``T`` real symmetric tridiagonal.

    Returns ``(diag, offdiag, Q)``; the phases that make the complex
    off-diagonal real are folded into ``Q``.
    """
    a = np.array(a, copy=True)
    n = a.shape[0]
    q = np.eye(n, dtype=a.dtype)
    for k in range(n - 2):
        x = a[k + 1:, k]
        xnorm = np.linalg.norm(x)
        if xnorm == 0.0:
            continue
        phase = x[0] / abs(x[0]) if x[0] != 0 else 1.0
        v = x.copy()
        v[0] += phase * xnorm
        v /= np.linalg.norm(v)
        # two-sided reflection H = I - 2 v v^H on rows/cols k+1:
        rows = a[k + 1:, k:]
        rows -= 2.0 * np.outer(v, v.conj() @ rows)
        cols = a[k:, k + 1:]
        cols -= 2.0 * np.outer(cols @ v, v.conj())
        qc = q[:, k + 1:]
        qc -= 2.0 * np.outer(qc @ v, v.conj())
    diag = np.array(np.real(np.diagonal(a)), dtype=np.float64)
    sub = np.diagonal(a, offset=-1).copy()
    offdiag = np.zeros(n, dtype=np.float64)
    if n > 1:
        offdiag[:-1] = np.abs(sub)
    if np.iscomplexobj(a):
        phases = np.ones(n, dtype=a.dtype)
        for k in range(n - 1):
            t = sub[k]
            phases[k + 1] = phases[k] * (t / abs(t) if t != 0 else 1.0)
        q = q * phases[None, :]
    else:
        signs = np.ones(n)
        for k in range(n - 1):
            signs[k + 1] = signs[k] * (-1.0 if sub[k] < 0 else 1.0)
        q = q * signs[None, :]
    return diag, offdiag, q


def eigh(a, max_iter: int = 60):
    """Eigendecomposition of a dense real symmetric or complex Hermitian matrix.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues in
    non-increasing order and eigenvectors as columns. Only the lower
    triangle's Hermitian part is assumed consistent; callers check
    Hermitian-ness beforehand.

    Raises
    ------
    NumericalError
        If the QL iteration fails to converge for some eigenvalue.
    """
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"eigh needs a square matrix, got shape {a.shape}")
    dtype = np.complex128 if np.iscomplexobj(a) else np.float64
    a = 0.5 * (a.astype(dtype) + a.astype(dtype).conj().T)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros((0, 0), dtype=dtype)
    diag, offdiag, q = _tridiagonalize(a)
    zt = np.eye(n)
    status = kernels.tridiagonal_ql(diag, offdiag, zt, max_iter)
    if status < 0:
        raise NumericalError(
            "tridiagonal QL iteration did not converge",
            eigenvalue_index=-status - 1,
            max_iter=max_iter,
            size=n,
        )
    order = np.argsort(-diag, kind="stable")
    vectors = q @ zt.T
    return diag[order], vectors[:, order]


def _check_hermitian(s):
    scale = frobenius_norm(s)
    defect = frobenius_norm(s - conj_transpose(s))
    if defect > HERMITIAN_RTOL * scale:
        raise NotHermitianError(
            f"matrix is not Hermitian: ||S - S*||_F = {defect:.3e} exceeds {HERMITIAN_RTOL:g} * ||S||_F"
        )


def _quaternion_vector_from_complex(u):
    # a complex eigenvector (x_0, y_0, x_1, y_1, ...) of the adjoint is the first
    # column of the adjoint of w with w_r = x_r + (-conj(y_r)) j
    x = u[0::2]
    y = u[1::2]
    return np.stack([x.real, x.imag, -y.real, y.imag], axis=-1)


def _orthogonalize_against(v, basis):
    for w in basis:
        v = v - qmul(w, qinner(w, v))
    return v


def _pick_cluster_vectors(candidates, count, accepted):
    """Greedily choose ``count`` quaternion directions spanning ``candidates``."""
    chosen = []
    remaining = [_orthogonalize_against(c, accepted) for c in candidates]
    for _ in range(count):
        norms = [np.sqrt(qnorm2(r).sum()) for r in remaining]
        best = int(np.argmax(norms))
        if norms[best] == 0.0:
            raise NumericalError("degenerate eigenspace extraction failed", cluster_size=len(candidates))
        w = remaining[best] / norms[best]
        chosen.append(w)
        remaining = [r - qmul(w, qinner(w, r)) for r in remaining]
    return chosen


def _clusters(values, pair_count):
    """Split descending ``values`` into runs of near-equal entries of even length."""
    scale = max(float(np.max(np.abs(values))), np.finfo(float).tiny)
    tol = _CLUSTER_RTOL * scale
    runs = []
    start = 0
    for i in range(1, len(values) + 1):
        if i == len(values) or values[i - 1] - values[i] > tol:
            runs.append([start, i])
            start = i
    merged = []
    for run in runs:
        if merged and (merged[-1][1] - merged[-1][0]) % 2:
            merged[-1][1] = run[1]
        else:
            merged.append(run)
    if (merged[-1][1] - merged[-1][0]) % 2 or sum(b - a for a, b in merged) != 2 * pair_count:
        raise NumericalError("adjoint spectrum does not pair up", size=pair_count)
    return merged


@dataclass(frozen=True)
class HermEigResult:
    """``S = W diag(eigenvalues) W*`` with eigenvalues non-increasing.

    ``eigenvectors`` is an ``(n, n, 4)`` quaternion matrix whose column
    ``l`` is the right eigenvector for ``eigenvalues[l]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def column(self, l: int) -> np.ndarray:
        return self.eigenvectors[:, l, :]


def hermitian_eig(s) -> HermEigResult:
    """Eigendecomposition of a Hermitian quaternion matrix.

    Eigenvalues are real and returned in non-increasing order. Each
    eigenvector has unit norm, satisfies ``S w = w lambda`` and is put in the
    canonical gauge of :func:`canonicalize_eigvec`; the eigenvector matrix as
    a whole is unitary. The result is a deterministic function of the input.

    Raises
    ------
    NotHermitianError
        If ``||S - S*||_F > 1e-9 ||S||_F``.
    NumericalError
        If the underlying complex eigensolver does not converge.
    """
    s = as_qmatrix(s)
    n, m, _ = s.shape
    if n != m:
        raise ShapeError(f"hermitian_eig needs a square matrix, got {s.shape[:2]}")
    _check_hermitian(s)
    if n == 0:
        return HermEigResult(np.zeros(0), np.zeros((0, 0, 4)))
    s = 0.5 * (s + conj_transpose(s))
    values, vectors = eigh(complex_adjoint(s))

    basis = []
    for start, stop in _clusters(values, n):
        candidates = [_quaternion_vector_from_complex(vectors[:, t]) for t in range(start, stop)]
        basis.extend(_pick_cluster_vectors(candidates, (stop - start) // 2, basis))

    # a second full pass removes cross-cluster leakage between nearby eigenvalues
    for _ in range(2):
        cleaned = []
        for v in basis:
            v = _orthogonalize_against(v, cleaned)
            cleaned.append(v / np.sqrt(qnorm2(v).sum()))
        basis = cleaned

    w = np.stack(basis, axis=1)
    sw = matmul(s, w)
    rayleigh = np.array([qinner(w[:, l], sw[:, l])[0] for l in range(n)])
    order = np.argsort(-rayleigh, kind="stable")
    w = w[:, order]
    rayleigh = rayleigh[order]
    w = np.stack([canonicalize_eigvec(w[:, l]) for l in range(n)], axis=1)
    return HermEigResult(rayleigh, w)


def canonicalize_eigvec(v) -> np.ndarray:
    """Fix the right unit-quaternion gauge of an eigenvector.

    Returns ``v u`` for the unit quaternion ``u`` that makes the entry of
    largest norm real and positive. Entries whose norms agree to a relative
    ``1e-10`` count as tied, and the lowest index wins. Idempotent.
    """
    v = as_qarray(v)
    if v.ndim != 2:
        raise ShapeError(f"expected a quaternion column of shape (n, 4), got {v.shape}")
    norms2 = qnorm2(v)
    top = float(np.max(norms2)) if len(norms2) else 0.0
    if top == 0.0:
        raise QuaternionDomainError("cannot canonicalize the zero vector")
    pivot = int(np.flatnonzero(norms2 >= top * (1.0 - 2 * _TIE_RTOL))[0])
    entry = v[pivot]
    if entry[0] > 0 and not entry[1:].any():
        return v.copy()
    u = qconj(entry) / np.sqrt(norms2[pivot])
    out = qmul(v, u)
    out[pivot] = [np.sqrt(norms2[pivot]), 0.0, 0.0, 0.0]
    return out
