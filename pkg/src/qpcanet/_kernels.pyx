# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Signatures mirror :mod:`qpcanet._kernels_py`."""
import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, hypot, sqrt

cnp.import_array()


def tridiagonal_ql(double[::1] d, double[::1] e, double[:, ::1] zt, int max_iter=60):
    """Implicit-shift QL on a symmetric tridiagonal matrix, in place.

    ``d`` is the diagonal, ``e[i]`` couples rows ``i`` and ``i + 1`` (the last
    entry is ignored). Plane rotations are applied to the *rows* of ``zt``.
    Returns the total number of sweeps, or ``-(l + 1)`` when eigenvalue ``l``
    fails to converge within ``max_iter`` sweeps.
    """
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t ncol = zt.shape[1]
    cdef Py_ssize_t l, m, i, k
    cdef int it, total = 0
    cdef double f = 0.0, tst1 = 0.0, eps = 2.220446049250313e-16
    cdef double g, p, r, dl1, h, c, c2, c3, el1, s, s2, zi, zi1
    if n == 0:
        return 0
    e[n - 1] = 0.0
    for l in range(n):
        tst1 = max(tst1, fabs(d[l]) + fabs(e[l]))
        m = l
        while m < n - 1:
            if fabs(e[m]) <= eps * tst1:
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
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(ncol):
                        zi = zt[i, k]
                        zi1 = zt[i + 1, k]
                        zt[i + 1, k] = s * zi + c * zi1
                        zt[i, k] = c * zi - s * zi1
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if not fabs(e[l]) > eps * tst1:
                    break
            total += it
        d[l] = d[l] + f
        e[l] = 0.0
    return total


def correlate_bank(double[:, :, ::1] x, double[:, :, :, ::1] kernels):
    """Zero-padded, same-size, multichannel cross-correlation.

    ``out[o, y, z] = sum_{c,u,v} kernels[o, c, u, v] * x[c, y + u - k1//2, z + v - k2//2]``
    """
    cdef Py_ssize_t C = x.shape[0], m = x.shape[1], n = x.shape[2]
    cdef Py_ssize_t O = kernels.shape[0], k1 = kernels.shape[2], k2 = kernels.shape[3]
    if kernels.shape[1] != C:
        raise ValueError("kernel channel count does not match input")
    cdef Py_ssize_t p1 = k1 // 2, p2 = k2 // 2
    out_arr = np.zeros((O, m, n), dtype=np.float64)
    cdef double[:, :, ::1] out = out_arr
    cdef Py_ssize_t o, c, u, v, y, z, y0, y1, z0, z1, yy, zz
    cdef double w
    for o in range(O):
        for c in range(C):
            for u in range(k1):
                y0 = p1 - u if p1 - u > 0 else 0
                y1 = m + p1 - u if m + p1 - u < m else m
                for v in range(k2):
                    w = kernels[o, c, u, v]
                    if w == 0.0:
                        continue
                    z0 = p2 - v if p2 - v > 0 else 0
                    z1 = n + p2 - v if n + p2 - v < n else n
                    for y in range(y0, y1):
                        yy = y + u - p1
                        for z in range(z0, z1):
                            zz = z + v - p2
                            out[o, y, z] += w * x[c, yy, zz]
    return out_arr


def block_histograms(cnp.int64_t[:, :, ::1] values, cnp.int64_t[::1] row_starts,
                     cnp.int64_t[::1] col_starts, Py_ssize_t bh, Py_ssize_t bw,
                     Py_ssize_t nbins):
    """Count histograms of integer maps over a grid of rectangular blocks.

    Blocks are enumerated row-major over ``(row_starts, col_starts)``; the
    result has shape ``(maps, blocks, nbins)``. Values must lie in
    ``[0, nbins)``; the caller validates this.
    """
    cdef Py_ssize_t M = values.shape[0]
    cdef Py_ssize_t R = row_starts.shape[0], Q = col_starts.shape[0]
    out_arr = np.zeros((M, R * Q, nbins), dtype=np.int64)
    cdef cnp.int64_t[:, :, ::1] out = out_arr
    cdef Py_ssize_t mi, a, b, y, z, r0, c0, blk
    for mi in range(M):
        for a in range(R):
            r0 = row_starts[a]
            for b in range(Q):
                c0 = col_starts[b]
                blk = a * Q + b
                for y in range(r0, r0 + bh):
                    for z in range(c0, c0 + bw):
                        out[mi, blk, values[mi, y, z]] += 1
    return out_arr
