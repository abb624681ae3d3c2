# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled backend for the hot kernels: reduced-word enumeration with norm
pruning, and point-pair kernel sums over group orbits.

Must stay behaviourally identical to eistwist._core_py (same ordering, same
outputs); tests compare the two backends directly.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log, sqrt

cnp.import_array()

DET_TOL = 1e-12

KERNEL_POWER = 0
KERNEL_BUMP = 1


def word_scan(object gens_in, object invmap_in, object seed_in, int L, double mu_max):
    """See eistwist._core_py.word_scan."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gens = np.ascontiguousarray(gens_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] invmap = np.ascontiguousarray(invmap_in, dtype=np.int64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] seed = np.ascontiguousarray(seed_in, dtype=np.float64).reshape(4)

    cdef int nletters = gens.shape[0]
    cdef Py_ssize_t cap = 4096
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mats = np.empty((cap, 4), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] parent = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[cnp.int16_t, ndim=1] letter = np.empty(cap, dtype=np.int16)
    cdef cnp.ndarray[cnp.int16_t, ndim=1] depth = np.empty(cap, dtype=np.int16)

    mats[0, 0] = seed[0]
    mats[0, 1] = seed[1]
    mats[0, 2] = seed[2]
    mats[0, 3] = seed[3]
    parent[0] = -1
    letter[0] = -1
    depth[0] = 0

    cdef Py_ssize_t total = 1, level_start = 0, level_end = 1, i
    cdef int dep, j
    cdef double a, b, c, d, ga, gb, gc, gd, na, nb, nc, nd, det, r, mu
    cdef long long invj

    for dep in range(1, L + 1):
        for j in range(nletters):
            invj = invmap[j]
            ga = gens[j, 0]
            gb = gens[j, 1]
            gc = gens[j, 2]
            gd = gens[j, 3]
            for i in range(level_start, level_end):
                if letter[i] == invj:
                    continue
                a = mats[i, 0]
                b = mats[i, 1]
                c = mats[i, 2]
                d = mats[i, 3]
                na = a * ga + b * gc
                nb = a * gb + b * gd
                nc = c * ga + d * gc
                nd = c * gb + d * gd
                det = na * nd - nb * nc
                if det - 1.0 > DET_TOL or det - 1.0 < -DET_TOL:
                    r = sqrt(det)
                    na /= r
                    nb /= r
                    nc /= r
                    nd /= r
                mu = na * na + nb * nb + nc * nc + nd * nd
                if mu > mu_max:
                    continue
                if total >= cap:
                    cap *= 2
                    mats = np.resize(mats, (cap, 4))
                    parent = np.resize(parent, cap)
                    letter = np.resize(letter, cap)
                    depth = np.resize(depth, cap)
                mats[total, 0] = na
                mats[total, 1] = nb
                mats[total, 2] = nc
                mats[total, 3] = nd
                parent[total] = i
                letter[total] = j
                depth[total] = dep
                total += 1
        if total == level_end:
            break
        level_start = level_end
        level_end = total

    return (mats[:total].copy(), parent[:total].copy(),
            letter[:total].copy(), depth[:total].copy())


def pair_kernel_sum(object mats_in, object chis_in, object zs_in, object ws_in,
                    int kind, double p0):
    """See eistwist._core_py.pair_kernel_sum."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] mats = np.ascontiguousarray(mats_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.complex128_t, ndim=3] chis = np.ascontiguousarray(chis_in, dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] zs = np.ascontiguousarray(zs_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ws = np.ascontiguousarray(ws_in, dtype=np.float64)

    cdef Py_ssize_t N = mats.shape[0]
    cdef Py_ssize_t n = chis.shape[1]
    cdef Py_ssize_t M = zs.shape[0]
    cdef Py_ssize_t P = ws.shape[0]

    cdef cnp.ndarray[cnp.float64_t, ndim=2] gw_re = np.empty((N, P), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] gw_im = np.empty((N, P), dtype=np.float64)

    cdef Py_ssize_t g, p, i, r_, c_
    cdef double a, b, c, d, xw, yw, den, x0, y0, u, kv, dx, dy, p0sq

    for g in range(N):
        a = mats[g, 0]
        b = mats[g, 1]
        c = mats[g, 2]
        d = mats[g, 3]
        for p in range(P):
            xw = ws[p, 0]
            yw = ws[p, 1]
            den = (c * xw + d) * (c * xw + d) + (c * yw) * (c * yw)
            gw_im[g, p] = yw / den
            gw_re[g, p] = ((a * xw + b) * (c * xw + d) + a * c * yw * yw) / den

    cdef cnp.ndarray[cnp.complex128_t, ndim=4] out = np.zeros((M, P, n, n), dtype=np.complex128)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] kvrow = np.empty(P, dtype=np.float64)
    p0sq = p0 * p0
    for i in range(M):
        x0 = zs[i, 0]
        y0 = zs[i, 1]
        for g in range(N):
            for p in range(P):
                dx = x0 - gw_re[g, p]
                dy = y0 - gw_im[g, p]
                u = (dx * dx + dy * dy) / (y0 * gw_im[g, p])
                if kind == KERNEL_POWER:
                    kvrow[p] = exp(-p0 * log(1.0 + u))
                else:
                    if u >= p0:
                        kvrow[p] = 0.0
                    else:
                        kvrow[p] = exp(1.0 - p0sq / (p0sq - u * u))
            for p in range(P):
                kv = kvrow[p]
                if kv == 0.0:
                    continue
                for r_ in range(n):
                    for c_ in range(n):
                        out[i, p, r_, c_] = out[i, p, r_, c_] + kv * chis[g, r_, c_]
    return out
