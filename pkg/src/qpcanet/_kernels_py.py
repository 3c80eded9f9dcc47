"""Pure-Python/NumPy versions of the compiled kernels in ``_kernels.pyx``."""
import math

import numpy as np


def tridiagonal_ql(d, e, zt, max_iter=60):
    n = d.shape[0]
    if n == 0:
        return 0
    eps = 2.220446049250313e-16
    f = 0.0
    tst1 = 0.0
    total = 0
    e[n - 1] = 0.0
    for l in range(n):
        tst1 = max(tst1, abs(d[l]) + abs(e[l]))
        m = l
        while m < n - 1:
            if abs(e[m]) <= eps * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    return -(l + 1)
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = math.hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2:] -= h
                f += h
                p = d[m]
                c = c2 = c3 = 1.0
                el1 = e[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = math.hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    zi = zt[i].copy()
                    zi1 = zt[i + 1].copy()
                    zt[i + 1] = s * zi + c * zi1
                    zt[i] = c * zi - s * zi1
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if not abs(e[l]) > eps * tst1:
                    break
            total += it
        d[l] = d[l] + f
        e[l] = 0.0
    return total


def correlate_bank(x, kernels):
    C, m, n = x.shape
    O, kc, k1, k2 = kernels.shape
    if kc != C:
        raise ValueError("kernel channel count does not match input")
    p1, p2 = k1 // 2, k2 // 2
    padded = np.zeros((C, m + k1 - 1, n + k2 - 1))
    padded[:, p1:p1 + m, p2:p2 + n] = x
    out = np.zeros((O, m, n))
    for u in range(k1):
        for v in range(k2):
            out += np.tensordot(kernels[:, :, u, v], padded[:, u:u + m, v:v + n], axes=(1, 0))
    return out


def block_histograms(values, row_starts, col_starts, bh, bw, nbins):
    M = values.shape[0]
    out = np.zeros((M, len(row_starts) * len(col_starts), nbins), dtype=np.int64)
    offsets = np.arange(M)[:, None] * nbins
    blk = 0
    for r0 in row_starts:
        for c0 in col_starts:
            window = values[:, r0:r0 + bh, c0:c0 + bw].reshape(M, -1) + offsets
            out[:, blk, :] = np.bincount(window.ravel(), minlength=M * nbins).reshape(M, nbins)
            blk += 1
    return out
