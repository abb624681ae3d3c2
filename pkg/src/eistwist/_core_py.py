"""Pure-numpy backend for the hot kernels.

Mirrors the compiled extension ``eistwist._core`` exactly: same signatures,
same node ordering (level by level, letter-major within a level), same
outputs.  Selected automatically when the compiled core is unavailable.
"""

from __future__ import annotations

import numpy as np

DET_TOL = 1e-12


def word_scan(gens, invmap, seed, L, mu_max):
    """Enumerate reduced words of length <= L over a symmetric generator set.

    Nodes carry the running product seed * g_{j1} * ... * g_{jk}.  A node is
    kept (and expanded) only while its squared Frobenius norm stays <= mu_max.
    Returns (mats (N,4), parent (N,), letter (N,), depth (N,)) with node 0 the
    seed itself; parent/letter encode the word tree.
    """
    gens = np.ascontiguousarray(gens, dtype=np.float64)
    invmap = np.asarray(invmap, dtype=np.int64)
    nletters = gens.shape[0]
    seed = np.asarray(seed, dtype=np.float64).reshape(4)

    mats = [seed[None, :].copy()]
    parents = [np.array([-1], dtype=np.int64)]
    letters = [np.array([-1], dtype=np.int16)]
    depths = [np.array([0], dtype=np.int16)]

    cur = mats[0]
    cur_letter = letters[0]
    cur_idx = np.array([0], dtype=np.int64)
    total = 1

    for depth in range(1, L + 1):
        lvl_mats, lvl_par, lvl_let = [], [], []
        for j in range(nletters):
            mask = cur_letter != invmap[j]
            if not mask.any():
                continue
            m = cur[mask]
            a, b, c, d = m[:, 0], m[:, 1], m[:, 2], m[:, 3]
            ga, gb, gc, gd = gens[j]
            nm = np.stack([a * ga + b * gc, a * gb + b * gd,
                           c * ga + d * gc, c * gb + d * gd], axis=1)
            det = nm[:, 0] * nm[:, 3] - nm[:, 1] * nm[:, 2]
            bad = np.abs(det - 1.0) > DET_TOL
            if bad.any():
                nm[bad] /= np.sqrt(det[bad])[:, None]
            par = cur_idx[mask]
            mu = np.einsum("ij,ij->i", nm, nm)
            keep = mu <= mu_max
            if not keep.all():
                nm = nm[keep]
                par = par[keep]
            if len(nm) == 0:
                continue
            lvl_mats.append(nm)
            lvl_par.append(par)
            lvl_let.append(np.full(len(nm), j, dtype=np.int16))
        if not lvl_mats:
            break
        nm = np.concatenate(lvl_mats)
        mats.append(nm)
        parents.append(np.concatenate(lvl_par))
        letters.append(np.concatenate(lvl_let))
        depths.append(np.full(len(nm), depth, dtype=np.int16))
        cur = nm
        cur_letter = letters[-1]
        cur_idx = np.arange(total, total + len(nm), dtype=np.int64)
        total += len(nm)

    return (np.concatenate(mats), np.concatenate(parents),
            np.concatenate(letters), np.concatenate(depths))


KERNEL_POWER = 0
KERNEL_BUMP = 1


def _kernel_values(u, kind, p0):
    if kind == KERNEL_POWER:
        return (1.0 + u) ** (-p0)
    if kind == KERNEL_BUMP:
        out = np.zeros_like(u)
        inside = u < p0
        ui = u[inside]
        out[inside] = np.exp(1.0 - p0 * p0 / (p0 * p0 - ui * ui))
        return out
    raise ValueError(f"unknown kernel kind {kind}")


def pair_kernel_sum(mats, chis, zs, ws, kind, p0):
    """Sum_g k(u(z, g w)) chi_g over the enumerated g, for all pairs (z, w).

    mats: (N,4) group elements, chis: (N,n,n) their twist matrices,
    zs: (M,2), ws: (P,2) points as (x, y) rows.  Returns (M,P,n,n) complex.
    """
    mats = np.asarray(mats, dtype=np.float64)
    chis = np.asarray(chis, dtype=np.complex128)
    zs = np.asarray(zs, dtype=np.float64)
    ws = np.asarray(ws, dtype=np.float64)
    N, n = chis.shape[0], chis.shape[1]
    M, P = zs.shape[0], ws.shape[0]

    a = mats[:, 0][:, None]
    b = mats[:, 1][:, None]
    c = mats[:, 2][:, None]
    d = mats[:, 3][:, None]
    xw = ws[:, 0][None, :]
    yw = ws[:, 1][None, :]
    den = (c * xw + d) ** 2 + (c * yw) ** 2
    gw_im = yw / den
    gw_re = ((a * xw + b) * (c * xw + d) + a * c * yw * yw) / den

    chif = chis.reshape(N, n * n)
    out = np.empty((M, P, n, n), dtype=np.complex128)
    for i in range(M):
        x0, y0 = zs[i]
        u = ((x0 - gw_re) ** 2 + (y0 - gw_im) ** 2) / (y0 * gw_im)
        kv = _kernel_values(u, kind, p0)
        out[i] = (kv.T @ chif).reshape(P, n, n)
    return out
