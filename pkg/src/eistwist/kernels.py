"""Invariant integral operators: point-pair kernels, the automorphic kernel,
principal parts at the cusps, the compact part, Hilbert-Schmidt and spectrum
probes of its discretization, and the resolvent of the hyperbolic Laplacian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from . import backend
from .group import GroupData, coset_scan, _scan
from .hyperbolic import GroupElement, PointH, point_pair_invariant
from .representation import (
    Representation,
    fixed_space_projection,
    rep_of_word,
    rep_stack,
)
from .special import GreenTable, adaptive_quad, gamma_ratio


def _opnorm(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.any(M) else 0.0


# ----------------------------------------------------------------------
# point-pair kernels
# ----------------------------------------------------------------------

@dataclass
class PointPairKernel:
    """Radial kernel k(u) of the point-pair invariant, with derivative.

    kinds: 'power' with k(u) = (1+u)^-sigma; 'bump', smooth and compactly
    supported on [0, u_max); 'green_difference' with k = G_a - G_b, finite at
    u = 0 because the log singularity cancels in the difference.
    """

    kind: str
    sigma: float = 0.0
    u_max: float = 0.0
    fn: object = None
    dfn: object = None
    backend_kind: int = -1
    backend_param: float = 0.0

    def __call__(self, u):
        return self.fn(u)

    def derivative(self, u):
        return self.dfn(u)


def power_kernel(sigma: float) -> PointPairKernel:
    if sigma <= 1.0:
        raise ValueError("power kernel needs sigma > 1 for summability")

    def k(u):
        return (1.0 + u) ** (-sigma)

    def dk(u):
        return -sigma * (1.0 + u) ** (-sigma - 1.0)

    return PointPairKernel("power", sigma=sigma, fn=k, dfn=dk,
                           backend_kind=backend.KERNEL_POWER, backend_param=sigma)


def bump_kernel(u_max: float) -> PointPairKernel:
    if u_max <= 0:
        raise ValueError("u_max must be positive")
    m2 = u_max * u_max

    def k(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        inside = u < u_max
        out[inside] = np.exp(1.0 - m2 / (m2 - u[inside] ** 2))
        return out if out.ndim else float(out)

    def dk(u):
        u = np.asarray(u, dtype=float)
        out = np.zeros_like(u)
        inside = u < u_max
        ui = u[inside]
        out[inside] = np.exp(1.0 - m2 / (m2 - ui ** 2)) * (-2.0 * ui * m2 / (m2 - ui ** 2) ** 2)
        return out if out.ndim else float(out)

    return PointPairKernel("bump", u_max=u_max, fn=k, dfn=dk,
                           backend_kind=backend.KERNEL_BUMP, backend_param=u_max)


def green_difference_kernel(s_a: complex, s_b: complex,
                            table_kw: dict | None = None) -> PointPairKernel:
    kw = table_kw or {}
    ga, gb = GreenTable(s_a, **kw), GreenTable(s_b, **kw)

    def k(u):
        return ga(u) - gb(u)

    def dk(u, h=1e-6):
        return (k(u * (1 + h)) - k(u * (1 - h))) / (2 * u * h)

    return PointPairKernel("green_difference", fn=k, dfn=dk)


# ----------------------------------------------------------------------
# automorphic kernel K(z, w) = sum_gamma k(u(z, gamma w)) chi(gamma)
# ----------------------------------------------------------------------

class _BallCache:
    def __init__(self, group, rep, L, mu_max):
        arrays = _scan(group, L, mu_max)
        self.mats = arrays[0]
        self.depth = arrays[3]
        self.chis = rep_stack(group, rep, arrays, inverse=False)


_ball_caches: dict = {}


def _ball_cache(group, rep, L, mu_max=np.inf) -> _BallCache:
    key = (id(group), id(rep), int(L), float(mu_max))
    if key not in _ball_caches:
        _ball_caches[key] = _BallCache(group, rep, L, mu_max)
    return _ball_caches[key]


def _orbit_u(mats, z: PointH, w: PointH):
    a, b, c, d = mats[:, 0], mats[:, 1], mats[:, 2], mats[:, 3]
    den = (c * w.x + d) ** 2 + (c * w.y) ** 2
    gw_im = w.y / den
    gw_re = ((a * w.x + b) * (c * w.x + d) + a * c * w.y * w.y) / den
    return ((z.x - gw_re) ** 2 + (z.y - gw_im) ** 2) / (z.y * gw_im)


def automorphic_kernel(group: GroupData, rep: Representation, k: PointPairKernel,
                       z: PointH, w: PointH, L: int, mu_max: float = np.inf):
    """Ball-truncated K(z, w); report carries per-shell norms and the last
    shell as the truncation estimate."""
    cache = _ball_cache(group, rep, L, mu_max)
    u = _orbit_u(cache.mats, z, w)
    kv = np.asarray(k(u), dtype=complex)
    total = np.tensordot(kv, cache.chis, axes=(0, 0))
    shells = {}
    for dep in np.unique(cache.depth):
        mask = cache.depth == dep
        shells[int(dep)] = _opnorm(np.tensordot(kv[mask], cache.chis[mask],
                                                axes=(0, 0)))
    last = max(shells) if shells else 0
    return total, {"error_estimate": shells.get(last, 0.0), "shells": shells,
                   "terms": len(u)}


def automorphic_kernel_grid(group: GroupData, rep: Representation,
                            k: PointPairKernel, zs, ws, L: int,
                            mu_max: float = np.inf):
    """K(z_i, w_j) for all pairs, through the compiled backend when the
    kernel kind supports it."""
    cache = _ball_cache(group, rep, L, mu_max)
    zs = np.asarray(zs, dtype=float)
    ws = np.asarray(ws, dtype=float)
    if k.backend_kind >= 0:
        return backend.pair_kernel_sum(cache.mats, cache.chis, zs, ws,
                                       k.backend_kind, k.backend_param)
    n = rep.dim
    out = np.empty((len(zs), len(ws), n, n), dtype=complex)
    for i, (x0, y0) in enumerate(zs):
        for j, (x1, y1) in enumerate(ws):
            u = _orbit_u(cache.mats, PointH(x0, y0), PointH(x1, y1))
            out[i, j] = np.tensordot(np.asarray(k(u), dtype=complex),
                                     cache.chis, axes=(0, 0))
    return out


# ----------------------------------------------------------------------
# principal parts H_a and the compact part
# ----------------------------------------------------------------------

class _PrincipalCache:
    """Coset rows of sigma_a^-1 gamma and P_a chi(gamma) for one cusp."""

    def __init__(self, group, rep, cusp, L, mu_max):
        cs = coset_scan(group, cusp, L, mu_max, right=GroupElement.identity())
        P = fixed_space_projection(group, rep, cusp)
        chi = np.empty((len(cs.words), rep.dim, rep.dim), dtype=complex)
        for i, w in enumerate(cs.words):
            chi[i] = P @ rep_of_word(rep, w)
        self.rows = cs.taus[:, 2:].copy()
        self.Pchi = chi
        self.P = P
        self.sigma_inv = group.cusps[cusp].sigma_inv


_principal_caches: dict = {}


def _principal_cache(group, rep, cusp, L, mu_max) -> _PrincipalCache:
    key = (id(group), id(rep), cusp, int(L), float(mu_max))
    if key not in _principal_caches:
        _principal_caches[key] = _PrincipalCache(group, rep, cusp, L, mu_max)
    return _principal_caches[key]


def _horocycle_integral(k: PointPairKernel, p: float, q: float):
    """int_R k(u) dt along the horocycle: u = (t^2 + (p-q)^2) / (p q).

    p, q are the two heights after moving the cusp to infinity; closed form
    for the power kernel, adaptive quadrature otherwise.
    """
    Y = p * q
    A = 1.0 + (p - q) ** 2 / Y
    if k.kind == "power":
        sig = k.sigma
        return (math.sqrt(Y) * A ** (0.5 - sig) * math.sqrt(math.pi)
                * gamma_ratio(sig - 0.5, sig).real)
    if k.kind == "bump":
        vmax2 = Y * k.u_max - (p - q) ** 2
        if vmax2 <= 0.0:
            return 0.0
        vmax = math.sqrt(vmax2)
        return complex(adaptive_quad(lambda v: k((v * v + (p - q) ** 2) / Y),
                                     -vmax, vmax, rel_tol=1e-10)).real
    # generic decaying kernel: truncate where u is large
    vmax = math.sqrt(Y * 1e8)
    return adaptive_quad(lambda v: k((v * v + (p - q) ** 2) / Y),
                         -vmax, vmax, rel_tol=1e-8)


def _heights_through(cache: _PrincipalCache, w: PointH):
    m, n = cache.rows[:, 0], cache.rows[:, 1]
    return w.y / ((m * w.x + n) ** 2 + (m * w.y) ** 2)


def principal_part(group: GroupData, rep: Representation, k: PointPairKernel,
                   cusp: int, z: PointH, w: PointH, L: int,
                   mu_max: float = 2e5):
    """H_a(z, w) = sum over cosets of int_R k(z, sigma_a n(t) sigma_a^-1
    gamma w) dt P_a chi(gamma); the translation integral depends only on the
    cusp-normalized heights of z and gamma w."""
    cache = _principal_cache(group, rep, cusp, L, mu_max)
    n = rep.dim
    if not np.any(cache.P):
        return np.zeros((n, n), dtype=complex)
    si = cache.sigma_inv
    den = (si.c * z.x + si.d) ** 2 + (si.c * z.y) ** 2
    p = z.y / den
    qs = _heights_through(cache, w)
    total = np.zeros((n, n), dtype=complex)
    for i, q in enumerate(qs):
        total += _horocycle_integral(k, p, q) * cache.Pchi[i]
    return total


def principal_part_grid(group: GroupData, rep: Representation,
                        k: PointPairKernel, cusp: int, zs, ws, L: int,
                        mu_max: float = 2e5):
    """H_a on a grid of pairs; power kernels evaluate in closed form."""
    cache = _principal_cache(group, rep, cusp, L, mu_max)
    zs = np.asarray(zs, dtype=float)
    ws = np.asarray(ws, dtype=float)
    n = rep.dim
    M, P = len(zs), len(ws)
    out = np.zeros((M, P, n, n), dtype=complex)
    if not np.any(cache.P):
        return out
    si = cache.sigma_inv
    zp = zs[:, 1] / ((si.c * zs[:, 0] + si.d) ** 2 + (si.c * zs[:, 1]) ** 2)
    m, nn = cache.rows[:, 0], cache.rows[:, 1]
    Q = ws[None, :, 1] / ((m[:, None] * ws[None, :, 0] + nn[:, None]) ** 2
                          + (m[:, None] * ws[None, :, 1]) ** 2)   # (K, P)
    if k.kind == "power":
        sig = k.sigma
        pref = math.sqrt(math.pi) * gamma_ratio(sig - 0.5, sig).real
        chif = cache.Pchi.reshape(len(m), n * n)
        for i in range(M):
            Y = zp[i] * Q
            A = 1.0 + (zp[i] - Q) ** 2 / Y
            F = pref * np.sqrt(Y) * A ** (0.5 - sig)      # (K, P)
            out[i] = (F.T @ chif).reshape(P, n, n)
        return out
    for i in range(M):
        for j in range(P):
            total = np.zeros((n, n), dtype=complex)
            for g in range(len(m)):
                total += _horocycle_integral(k, zp[i], Q[g, j]) * cache.Pchi[g]
            out[i, j] = total
    return out


def compact_part(group: GroupData, rep: Representation, k: PointPairKernel,
                 z: PointH, w: PointH, L: int, mu_max: float = np.inf,
                 coset_mu_max: float = 2e5):
    """K - sum_a H_a at one pair of points."""
    total, report = automorphic_kernel(group, rep, k, z, w, L, mu_max)
    for cusp in range(len(group.cusps)):
        total = total - principal_part(group, rep, k, cusp, z, w, L,
                                       mu_max=coset_mu_max)
    return total, report


def compact_part_grid(group: GroupData, rep: Representation,
                      k: PointPairKernel, zs, ws, L: int,
                      mu_max: float = np.inf, coset_mu_max: float = 2e5):
    out = automorphic_kernel_grid(group, rep, k, zs, ws, L, mu_max)
    for cusp in range(len(group.cusps)):
        out = out - principal_part_grid(group, rep, k, cusp, zs, ws, L,
                                        mu_max=coset_mu_max)
    return out


# ----------------------------------------------------------------------
# quadrature grid over the fundamental domain
# ----------------------------------------------------------------------

@dataclass
class QuadratureGrid:
    """Nodes and weights covering F(Y) and the cusp strips up to Y_max."""

    nodes: np.ndarray      # (M, 2) of (x, y)
    weights: np.ndarray    # (M,)
    Y: float
    Y_max: float
    level: int

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


def build_grid(group: GroupData, Y: float = 2.5, Y_max: float = 12.0,
               level: int = 1, base: int = 14) -> QuadratureGrid:
    """Midpoint lattice on the central part plus log-spaced cusp strips.

    ``level`` doubles the node density; weights are hyperbolic (dx dy / y^2),
    so the total weight converges to the covered area under refinement.
    """
    nx = base * level
    xs_lo = min(s.x0 for s in group.sides if s.kind == "vline")
    xs_hi = max(s.x0 for s in group.sides if s.kind == "vline")
    # heights where every cusp zone is entered: bounded by max over sides
    y_top = 2.0 * Y * max(1.0, max(abs(c.sigma.a) ** 2 for c in group.cusps))
    y_lo = 0.02
    ny = int(base * level * 1.6)
    dx = (xs_hi - xs_lo) / nx
    lys = np.linspace(math.log(y_lo), math.log(y_top), ny + 1)
    nodes = []
    weights = []
    # zone membership must see cusp-zone translates at every ideal vertex of
    # F (e.g. the vertex -1 carries a translate of the cusp-1 zone), so the
    # height test runs over sigma_a^-1 gamma for a small ball of gamma
    zone_rows = []
    ball_mats = _scan(group, 2, np.inf)[0]
    for c in group.cusps:
        si = c.sigma_inv
        m = si.c * ball_mats[:, 0] + si.d * ball_mats[:, 2]
        n = si.c * ball_mats[:, 1] + si.d * ball_mats[:, 3]
        zone_rows.append((m, n))
    zone_rows = (np.concatenate([r[0] for r in zone_rows]),
                 np.concatenate([r[1] for r in zone_rows]))

    def central(x, y):
        if not group.contains(PointH(x, y), tol=0.0):
            return False
        m, n = zone_rows
        h = y / ((m * x + n) ** 2 + (m * y) ** 2)
        return bool(np.max(h) < Y)

    sub = [-1.0 / 3.0, 0.0, 1.0 / 3.0]
    for i in range(nx):
        x = xs_lo + (i + 0.5) * dx
        for jy in range(ny):
            y = math.exp(0.5 * (lys[jy] + lys[jy + 1]))
            dy = math.exp(lys[jy + 1]) - math.exp(lys[jy])
            # fractional cell weight from a 3x3 subsample, for boundary cells
            frac = sum(central(x + sx * dx, y + sy * dy)
                       for sx in sub for sy in sub) / 9.0
            if frac == 0.0:
                continue
            nodes.append((x, y))
            weights.append(frac * dx * dy / (y * y))
    # cusp strips
    n_strip_x = max(4, 2 * level)
    n_strip_y = max(6, 4 * level)
    for cusp in group.cusps:
        sig = cusp.sigma
        lys2 = np.linspace(math.log(Y), math.log(Y_max), n_strip_y + 1)
        for i in range(n_strip_x):
            xprime = (i + 0.5) / n_strip_x
            for jy in range(n_strip_y):
                yprime = math.exp(0.5 * (lys2[jy] + lys2[jy + 1]))
                dyp = math.exp(lys2[jy + 1]) - math.exp(lys2[jy])
                w = (1.0 / n_strip_x) * dyp / (yprime * yprime)
                num = complex(sig.a * xprime + sig.b, sig.a * yprime)
                den = complex(sig.c * xprime + sig.d, sig.c * yprime)
                zz = num / den
                nodes.append((zz.real, yprime / abs(den) ** 2))
                weights.append(w)
    return QuadratureGrid(np.array(nodes), np.array(weights), Y, Y_max, level)


# ----------------------------------------------------------------------
# Hilbert-Schmidt estimate and spectrum probe
# ----------------------------------------------------------------------

def hs_norm_estimate(group: GroupData, rep: Representation, k: PointPairKernel,
                     grid: QuadratureGrid, L: int,
                     refined: QuadratureGrid | None = None,
                     mu_max: float = np.inf, coset_mu_max: float = 2e5):
    """Quadrature of the squared Frobenius norm of the compact part over
    grid x grid; optionally repeated on a refined grid for the stability
    report (relative change <= 10% is the desk-scale evidence)."""
    vals = []
    for g in ([grid] if refined is None else [grid, refined]):
        Km = compact_part_grid(group, rep, k, g.nodes, g.nodes, L,
                               mu_max=mu_max, coset_mu_max=coset_mu_max)
        fro2 = np.sum(np.abs(Km) ** 2, axis=(2, 3))
        vals.append(float(np.einsum("i,ij,j->", g.weights, fro2, g.weights)))
    report = {"values": vals, "nodes": [len(grid.nodes)] +
              ([len(refined.nodes)] if refined is not None else [])}
    if len(vals) == 2 and vals[1] != 0:
        report["relative_change"] = abs(vals[1] - vals[0]) / abs(vals[1])
    return vals[-1], report


def kernel_spectrum_probe(group: GroupData, rep: Representation,
                          k: PointPairKernel, grid: QuadratureGrid, L: int,
                          mu_max: float = np.inf, coset_mu_max: float = 2e5,
                          max_nodes: int = 4000):
    """Eigenvalues (by descending modulus) of the Nystrom discretization
    M[(i,.),(j,.)] = Khat(z_i, z_j) w_j of the compact part."""
    Mn = len(grid.nodes) * rep.dim
    if Mn > max_nodes:
        raise MemoryError(f"discretization would be {Mn}x{Mn}; refusing above "
                          f"{max_nodes}")
    Km = compact_part_grid(group, rep, k, grid.nodes, grid.nodes, L,
                           mu_max=mu_max, coset_mu_max=coset_mu_max)
    n = rep.dim
    big = (Km * grid.weights[None, :, None, None]).transpose(0, 2, 1, 3)
    big = big.reshape(Mn, Mn)
    vals = np.linalg.eigvals(big)
    return vals[np.argsort(-np.abs(vals))]


# ----------------------------------------------------------------------
# zeroth Fourier coefficient, resolvent, finite-difference Laplacian
# ----------------------------------------------------------------------

def zeroth_coefficient(group: GroupData, rep: Representation, f, cusp: int,
                       y: float, rel_tol: float = 1e-9):
    """c_0(f, a, y) = int_0^1 P_a f(sigma_a (x + iy)) dx for a callable f."""
    sig = group.cusps[cusp].sigma
    P = fixed_space_projection(group, rep, cusp)

    def integrand(x):
        num = complex(sig.a * x + sig.b, sig.a * y)
        den = complex(sig.c * x + sig.d, sig.c * y)
        zz = num / den
        return P @ np.asarray(f(PointH(zz.real, y / abs(den) ** 2)))

    return adaptive_quad(integrand, 0.0, 1.0, rel_tol=rel_tol)


_green_tables: dict = {}


def _green_table(s) -> GreenTable:
    key = complex(s)
    if key not in _green_tables:
        _green_tables[key] = GreenTable(s)
    return _green_tables[key]


def resolvent_apply(s, f, support_box, z: PointH, n_theta: int = 96,
                    r_panels: int = 40, r_min: float = 1e-8,
                    r_max: float | None = None):
    """R_s f(z) = -int_H G_s(u(z,w)) f(w) dmu(w) for compactly supported f.

    The integral runs in polar coordinates centered at z with a log-radial
    Gauss grid, so the rule moves rigidly with z and the quadrature error is
    smooth under finite differencing of the result.
    """
    gt = _green_table(s)
    x0, x1, y0, y1 = support_box
    if r_max is None:
        r_max = max(abs(complex(cx, cy) - complex(z.x, z.y))
                    for cx in (x0, x1) for cy in (y0, y1)) * 1.05 + 0.1
    thetas = (np.arange(n_theta) + 0.5) * (2.0 * math.pi / n_theta)
    wt = 2.0 * math.pi / n_theta
    glx, glw = np.polynomial.legendre.leggauss(8)
    edges = np.linspace(math.log(r_min), math.log(r_max), r_panels + 1)
    vs, wv = [], []
    for i in range(r_panels):
        mid = 0.5 * (edges[i] + edges[i + 1])
        half = 0.5 * (edges[i + 1] - edges[i])
        vs.append(mid + half * glx)
        wv.append(half * glw)
    vs = np.concatenate(vs)
    wv = np.concatenate(wv)
    rs = np.exp(vs)

    xs = z.x + rs[:, None] * np.cos(thetas)[None, :]
    ys = z.y + rs[:, None] * np.sin(thetas)[None, :]
    valid = ys > 1e-12
    u = np.zeros_like(xs)
    u[valid] = (rs[:, None] ** 2 * np.ones_like(xs))[valid] / (z.y * ys[valid])
    gv = np.zeros(xs.shape, dtype=complex)
    gv[valid] = gt(u[valid])

    fz = f(PointH(z.x, z.y))
    dim = np.shape(fz)[0] if np.ndim(fz) else 1
    fv = np.zeros(xs.shape + (dim,), dtype=complex)
    inside = valid & (xs >= x0) & (xs <= x1) & (ys >= y0) & (ys <= y1)
    idx = np.nonzero(inside)
    for a, t in zip(*idx):
        fv[a, t] = f(PointH(xs[a, t], ys[a, t]))
    meas = np.zeros_like(xs)
    meas[valid] = (rs[:, None] ** 2 * np.ones_like(xs))[valid] / ys[valid] ** 2
    weight = (wv[:, None] * wt) * meas
    out = -np.einsum("rt,rt,rtj->j", weight, gv, fv)
    return out


def laplacian_fd(f, z: PointH, h: float = 1e-3):
    """Hyperbolic Laplacian -y^2 (f_xx + f_yy) by the 5-point stencil."""
    c = np.asarray(f(z), dtype=complex)
    fx1 = np.asarray(f(PointH(z.x + h, z.y)), dtype=complex)
    fx0 = np.asarray(f(PointH(z.x - h, z.y)), dtype=complex)
    fy1 = np.asarray(f(PointH(z.x, z.y + h)), dtype=complex)
    fy0 = np.asarray(f(PointH(z.x, z.y - h)), dtype=complex)
    return -(z.y ** 2) * (fx1 + fx0 + fy1 + fy0 - 4.0 * c) / (h * h)
