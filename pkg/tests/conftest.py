import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from qpcanet import kernels  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request):
    """Each available kernel module in turn (``python`` and, if built, ``compiled``)."""
    return kernels.BACKENDS[request.param]


def random_hermitian(rng, n, spread=1.0):
    """``Q D Q*`` with random unitary ``Q`` (via QR of the complex adjoint) and real ``D``."""
    from qpcanet.linalg import conj_transpose, matmul

    a = rng.normal(size=(n, n, 4))
    q, _ = _quaternion_qr(a)
    d = np.zeros((n, n, 4))
    d[np.arange(n), np.arange(n), 0] = rng.normal(scale=spread, size=n)
    return matmul(matmul(q, d), conj_transpose(q))


def _quaternion_qr(a):
    # Gram-Schmidt on quaternion columns; independent of the eigensolver
    from qpcanet.quaternion import qconj, qmul

    n = a.shape[1]
    q = np.zeros_like(a)
    for j in range(n):
        v = a[:, j].copy()
        for _ in range(2):
            for i in range(j):
                coef = qmul(qconj(q[:, i]), v).sum(axis=0)
                v = v - qmul(q[:, i], coef)
        q[:, j] = v / np.sqrt((v**2).sum())
    return q, None


ACCEPTANCE_LINES = []


def acceptance_line(number, ok, detail, soft=False):
    """Record and print one verdict line for an acceptance criterion."""
    verdict = "PASS" if ok else ("WARN" if soft else "FAIL")
    line = f"[{verdict}] criterion {number:>2}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
