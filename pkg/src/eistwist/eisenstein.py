"""Twisted Eisenstein series: direct coset summation, the Fourier/Kloosterman
expansion, Kloosterman sums, the constant-term (scattering) matrix, growth
checks and incomplete Eisenstein series.

Conventions fixed here (and adjudicated against the direct sum by the
cross-oracle tests):

* the constant term of E_a(sigma_b z) is
  delta_ab y^s P_a + sqrt(pi) Gamma(s-1/2)/Gamma(s)
      [P_b sum_c c^{-2s} S_ab(0,c,chi) P_a] y^{1-s},
  with Gamma(s-1/2) (forced by the defining integral) and the left projector
  P_b, the j=1 spectral block of chi(gamma_b);
* the nonzero frequencies of the j-th spectral block are r = k + nu_j, k in Z,
  matching the equivariance E(sigma_b(z+1)) = chi(gamma_b) E(sigma_b z): the
  P_j component carries e((nu_j + Z) x);
* W_s at frequency r means 2 sqrt(|r| y) K_{s-1/2}(2 pi |r| y) e(r x).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .group import (
    DoubleCosetData,
    GroupData,
    Word,
    coset_scan,
    double_cosets,
    word_evaluate,
)
from .hyperbolic import GroupElement, PointH
from .representation import (
    CuspEigenData,
    Representation,
    cusp_eigendata,
    fixed_space_projection,
    rep_of_word_inverse,
)
from .special import e_of, gamma_ratio, log_gamma, whittaker_profile

import cmath


def _opnorm(M) -> float:
    return float(np.linalg.norm(M, 2)) if np.any(M) else 0.0


@dataclass
class EisensteinParams:
    """Evaluation parameters: source cusp, spectral point and truncations.

    ``L`` bounds the word length of the direct coset sum, ``mu_max`` its
    Frobenius-norm budget (derived from c_max when omitted); ``c_max`` and
    ``k_max`` truncate the expansion's modulus and frequency sums.  If
    Re(s) <= sigma0 is detected against a growth fit, a warning is issued
    rather than an error (probing divergence is allowed).
    """

    cusp_from: int
    s: complex
    L: int = 8
    c_max: float = 50.0
    k_max: int = 10
    mu_max: float | None = None
    sigma0: float | None = None

    def __post_init__(self):
        self.s = complex(self.s)
        if self.mu_max is None:
            self.mu_max = 64.0 * max(self.c_max * self.c_max, 400.0)
        if self.sigma0 is not None and self.s.real <= self.sigma0:
            warnings.warn(
                f"Re(s) = {self.s.real} is not above sigma0 = {self.sigma0}; "
                "the series may diverge", stacklevel=2)


# ----------------------------------------------------------------------
# direct summation
# ----------------------------------------------------------------------

class _DirectCache:
    """Per (cusp, L, mu_max) arrays for the direct sum: lower rows of
    sigma_a^-1 gamma over coset representatives, chi(gamma^-1) P_a, lengths."""

    def __init__(self, group, rep, cusp, L, mu_max):
        cs = coset_scan(group, cusp, L, mu_max, right=GroupElement.identity())
        P = fixed_space_projection(group, rep, cusp)
        chi = np.empty((len(cs.words), rep.dim, rep.dim), dtype=complex)
        for i, w in enumerate(cs.words):
            chi[i] = rep_of_word_inverse(group, rep, w) @ P
        self.rows = cs.taus[:, 2:].copy()
        self.chiP = chi
        self.lengths = cs.lengths
        self.P = P
        self.L = L
        self.mu_max = mu_max


_direct_caches: dict = {}


def _direct_cache(group, rep, cusp, L, mu_max) -> _DirectCache:
    key = (id(group), id(rep), cusp, L, float(mu_max))
    if key not in _direct_caches:
        _direct_caches[key] = _DirectCache(group, rep, cusp, L, mu_max)
    return _direct_caches[key]


def eisenstein_direct(group: GroupData, rep: Representation,
                      params: EisensteinParams, z: PointH):
    """E_a(z, s, chi) by summation over Gamma_a \\ Gamma met by the ball.

    Returns (matrix, report); the report carries the norm of the last
    word-length shell (the truncation-error estimate) and per-shell norms.
    """
    a = params.cusp_from
    cache = _direct_cache(group, rep, a, params.L, params.mu_max)
    n = rep.dim
    if not np.any(cache.P):
        return np.zeros((n, n), dtype=complex), {"error_estimate": 0.0,
                                                 "shells": {}, "terms": 0}
    m = cache.rows[:, 0]
    q = cache.rows[:, 1]
    den = (m * z.x + q) ** 2 + (m * z.y) ** 2
    imvals = z.y / den
    weights = np.exp(params.s * np.log(imvals))
    total = np.tensordot(weights, cache.chiP, axes=(0, 0))
    shells = {}
    for length in np.unique(cache.lengths):
        mask = cache.lengths == length
        shells[int(length)] = _opnorm(np.tensordot(weights[mask],
                                                   cache.chiP[mask], axes=(0, 0)))
    last = max(shells) if shells else 0
    report = {"error_estimate": shells.get(last, 0.0), "shells": shells,
              "terms": int(len(m)), "L": params.L, "mu_max": params.mu_max}
    return total, report


def incomplete_eisenstein(group: GroupData, rep: Representation, cusp: int,
                          psi_support, psi, z: PointH, L: int,
                          mu_max: float | None = None):
    """Incomplete series sum psi(Im(sigma_a^-1 gamma z)) chi(gamma^-1) P_a.

    Only cosets with the height inside [A, B] = psi_support contribute, so
    the sum is finite; saturation compares the contributing coset set between
    the (L, mu) and (L+2, 4 mu) scans.
    """
    A, B = psi_support
    if A <= 0:
        raise ValueError("support must satisfy A > 0")
    if mu_max is None:
        mu_max = 64.0 * max(400.0, 4.0 * (z.y + 1.0 / z.y) / A)
    sets = []
    vals = []
    for (Lk, muk) in ((L, mu_max), (L + 2, 4.0 * mu_max)):
        cache = _direct_cache(group, rep, cusp, Lk, muk)
        m, q = cache.rows[:, 0], cache.rows[:, 1]
        im = z.y / ((m * z.x + q) ** 2 + (m * z.y) ** 2)
        mask = (im >= A) & (im <= B)
        keys = {(round(mm * 1e6), round(qq * 1e6))
                for mm, qq in cache.rows[mask]}
        sets.append(keys)
        n = rep.dim
        total = np.zeros((n, n), dtype=complex)
        for i in np.nonzero(mask)[0]:
            total += psi(im[i]) * cache.chiP[i]
        vals.append(total)
    saturated = sets[0] == sets[1]
    return vals[1], {"saturated": saturated, "contributing": len(sets[1])}


# ----------------------------------------------------------------------
# Kloosterman sums and expansion coefficients
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class KloostermanValue:
    r: float
    c: float
    value: np.ndarray


class _EtaCache:
    """chi((sigma_a omega sigma_b^-1)^-1) for the stored double cosets."""

    def __init__(self, group, rep, dc: DoubleCosetData):
        self.by_key = {}
        for e in dc.entries:
            self.by_key[(round(e.c * 1e6), round(e.d * 1e6))] = \
                rep_of_word_inverse(group, rep, e.word)


_eta_caches: dict = {}


def _eta_cache(group, rep, dc) -> _EtaCache:
    key = (id(group), id(rep), id(dc))
    if key not in _eta_caches:
        _eta_caches[key] = _EtaCache(group, rep, dc)
    return _eta_caches[key]


def kloosterman_sum(group: GroupData, rep: Representation, dc: DoubleCosetData,
                    r: float, c: float) -> KloostermanValue:
    """S_ab(r, c, chi) = sum over d (mod c) of e(r d / c) eta(omega_{c,d}^-1)."""
    entries = dc.at_modulus(c)
    if not entries:
        raise ValueError(f"modulus c = {c} not present in the double coset data")
    eta = _eta_cache(group, rep, dc)
    n = rep.dim
    total = np.zeros((n, n), dtype=complex)
    for e in entries:
        total += e_of(r * e.d / e.c) * eta.by_key[(round(e.c * 1e6), round(e.d * 1e6))]
    return KloostermanValue(r, c, total)


def _kloosterman_tail(dc: DoubleCosetData, s: complex):
    """Crude tail bound sum_{c > c_max} (class count) c^{-2 Re s}, fitted
    linearly from the stored class counts."""
    moduli = dc.moduli()
    if not moduli:
        return 0.0
    density = max(len(dc.at_modulus(c)) / c for c in moduli)
    sigma = s.real
    if sigma <= 1.0:
        return float("inf")
    cm = dc.c_max
    return density * cm ** (2.0 - 2.0 * sigma) / (2.0 * sigma - 2.0)


def phi_constant(group: GroupData, rep: Representation, dc: DoubleCosetData,
                 s: complex):
    """Constant-term matrix: sqrt(pi) Gamma(s-1/2)/Gamma(s)
    P_b [sum_c c^{-2s} S_ab(0,c,chi)] P_a, with its modulus-tail estimate."""
    s = complex(s)
    Pa = fixed_space_projection(group, rep, dc.cusp_a)
    Pb = fixed_space_projection(group, rep, dc.cusp_b)
    n = rep.dim
    if not np.any(Pa):
        return np.zeros((n, n), dtype=complex), {"tail": 0.0}
    core = np.zeros((n, n), dtype=complex)
    for c in dc.moduli():
        S = kloosterman_sum(group, rep, dc, 0.0, c).value
        core += cmath.exp(-2.0 * s * math.log(c)) * S
    pref = math.sqrt(math.pi) * gamma_ratio(s - 0.5, s)
    phi = pref * (Pb @ core @ Pa)
    tail = abs(pref) * _kloosterman_tail(dc, s)
    return phi, {"tail": tail, "prefactor": pref, "saturated": dc.saturated}


def phi_mode(group: GroupData, rep: Representation, dc: DoubleCosetData,
             eig: CuspEigenData, j: int, r: float, s: complex):
    """Mode coefficient (pi^s/Gamma(s)) |r|^{s-1}
    P_j [sum_c c^{-2s} S_ab(r,c,chi)] P_a for r != 0."""
    if r == 0.0:
        raise ValueError("phi_mode requires r != 0; use phi_constant")
    s = complex(s)
    Pa = fixed_space_projection(group, rep, dc.cusp_a)
    Pj = eig.projections[j]
    n = rep.dim
    if not np.any(Pj) or not np.any(Pa):
        return np.zeros((n, n), dtype=complex), {"tail": 0.0}
    core = np.zeros((n, n), dtype=complex)
    for c in dc.moduli():
        S = kloosterman_sum(group, rep, dc, r, c).value
        core += cmath.exp(-2.0 * s * math.log(c)) * S
    pref = cmath.exp(s * math.log(math.pi) - log_gamma(s)
                     + (s - 1.0) * math.log(abs(r)))
    phi = pref * (Pj @ core @ Pa)
    tail = abs(pref) * _kloosterman_tail(dc, s)
    return phi, {"tail": tail}


# ----------------------------------------------------------------------
# Fourier expansion
# ----------------------------------------------------------------------

@dataclass
class FourierExpansion:
    """Constant-term data plus (eigenindex, frequency, coefficient) triples."""

    cusp_a: int
    cusp_b: int
    s: complex
    delta_term: bool
    P_a: np.ndarray
    phi_ab: np.ndarray
    mode_terms: list          # of (j, frequency, coefficient matrix)
    nu: tuple
    c_max: float
    k_max: int
    saturated: bool
    tail_constant: float
    tail_mode: float


_dc_caches: dict = {}


def _cached_double_cosets(group, a, b, L, c_max):
    key = (id(group), a, b, L, float(c_max))
    if key not in _dc_caches:
        _dc_caches[key] = double_cosets(group, a, b, L, c_max)
    return _dc_caches[key]


def fourier_expansion(group: GroupData, rep: Representation,
                      params: EisensteinParams, cusp_b: int,
                      dc: DoubleCosetData | None = None) -> FourierExpansion:
    """Assemble the expansion of E_a(sigma_b z, s, chi) up to the truncations.

    The j-th spectral block of chi(gamma_b) contributes frequencies
    r = k + nu_j; only |r| <= k_max + 1 are kept and the dropped-frequency
    scale is reported through the evaluator's tail estimate.
    """
    a = params.cusp_from
    s = params.s
    if dc is None:
        dc = _cached_double_cosets(group, a, cusp_b, params.L, params.c_max)
    eig = cusp_eigendata(group, rep, cusp_b)
    Pa = fixed_space_projection(group, rep, a)
    phi0, rep0 = phi_constant(group, rep, dc, s)
    modes = []
    tail_mode = 0.0
    for j, nu in enumerate(eig.nu):
        if not np.any(eig.projections[j]) or not np.any(Pa):
            continue
        for k in range(-params.k_max, params.k_max + 1):
            r = k + nu
            if abs(r) < 1e-12 or abs(r) > params.k_max + 1.0:
                continue
            coef, repm = phi_mode(group, rep, dc, eig, j, r, s)
            modes.append((j, r, coef))
            tail_mode = max(tail_mode, repm["tail"])
    return FourierExpansion(
        cusp_a=a, cusp_b=cusp_b, s=s, delta_term=(a == cusp_b), P_a=Pa,
        phi_ab=phi0, mode_terms=modes, nu=eig.nu, c_max=params.c_max,
        k_max=params.k_max, saturated=dc.saturated,
        tail_constant=rep0.get("tail", 0.0), tail_mode=tail_mode)


def fourier_evaluate(group: GroupData, rep: Representation,
                     params: EisensteinParams, cusp_b: int, z: PointH,
                     expansion: FourierExpansion | None = None):
    """Evaluate the Fourier expansion at z = x + iy in sigma_b coordinates.

    Returns (matrix, report) where the report includes the frequency-tail
    estimate from the Whittaker decay exp(-2 pi (k_max+1-max nu) y).
    """
    if expansion is None:
        expansion = fourier_expansion(group, rep, params, cusp_b)
    s = params.s
    x, y = z.x, z.y
    n = rep.dim
    total = np.zeros((n, n), dtype=complex)
    if expansion.delta_term:
        total += cmath.exp(s * math.log(y)) * expansion.P_a
    total += cmath.exp((1.0 - s) * math.log(y)) * expansion.phi_ab
    coef_scale = 0.0
    for j, r, coef in expansion.mode_terms:
        w = whittaker_profile(s, r, y) * e_of(r * x)
        total += w * coef
        coef_scale = max(coef_scale, _opnorm(coef))
    f_next = expansion.k_max + 1.0 - max(expansion.nu)
    freq_tail = coef_scale * 2.0 * math.sqrt(max(f_next * y, 1e-30)) \
        * math.exp(-2.0 * math.pi * f_next * y) * 4.0
    report = {
        "saturated": expansion.saturated,
        "tail_constant": expansion.tail_constant * y ** (1.0 - s.real),
        "tail_mode": expansion.tail_mode,
        "freq_tail": freq_tail,
        "modes": len(expansion.mode_terms),
    }
    return total, report


def scattering_matrix(group: GroupData, rep: Representation, s: complex,
                      c_max: float, L: int):
    """Block matrix Phi(s) = (phi_ab(s)) over all cusp pairs."""
    ncusp = len(group.cusps)
    n = rep.dim
    out = np.zeros((ncusp * n, ncusp * n), dtype=complex)
    reports = {}
    for a in range(ncusp):
        for b in range(ncusp):
            dc = _cached_double_cosets(group, a, b, L, c_max)
            phi, rpt = phi_constant(group, rep, dc, s)
            out[b * n:(b + 1) * n, a * n:(a + 1) * n] = phi
            reports[(a, b)] = rpt
    return out, reports


# ----------------------------------------------------------------------
# growth checks
# ----------------------------------------------------------------------

def growth_check(group: GroupData, rep: Representation, params: EisensteinParams,
                 cusp_b: int, y_grid, envelope_grid=(0.2, 1.0, 5.0, 20.0)):
    """Exponential-decay fit of the constant-term remainder on y_grid and the
    power-envelope constant on envelope_grid.

    Returns a report dict with (C, beta, r_squared) for the remainder fit
    ||E - delta y^s P_a - phi y^{1-s}|| ~ C exp(-beta y) and the envelope
    constant sup ||E|| / (y^sigma + y^-sigma).
    """
    expansion = fourier_expansion(group, rep, params, cusp_b)
    s = params.s
    rem = []
    for y in y_grid:
        z = PointH(0.0, float(y))
        val, _ = fourier_evaluate(group, rep, params, cusp_b, z, expansion)
        const = cmath.exp((1.0 - s) * math.log(y)) * expansion.phi_ab
        if expansion.delta_term:
            const = const + cmath.exp(s * math.log(y)) * expansion.P_a
        rem.append(_opnorm(val - const))
    rem = np.array(rem)
    ys = np.array([float(y) for y in y_grid])
    mask = rem > 0
    beta = amp = r2 = float("nan")
    if mask.sum() >= 3:
        logs = np.log(rem[mask])
        coef = np.polyfit(ys[mask], logs, 1)
        beta, amp = -coef[0], math.exp(coef[1])
        fitted = np.polyval(coef, ys[mask])
        ss_res = float(np.sum((logs - fitted) ** 2))
        ss_tot = float(np.sum((logs - logs.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    sigma = s.real
    env = []
    for y in envelope_grid:
        # more frequencies are needed down the cusp; widen k_max as y shrinks
        km = max(params.k_max, int(10.0 / max(float(y), 0.05)) + 2)
        p2 = EisensteinParams(params.cusp_from, params.s, L=params.L,
                              c_max=params.c_max, k_max=km, mu_max=params.mu_max)
        val, _ = fourier_evaluate(group, rep, p2, cusp_b, PointH(0.0, float(y)))
        env.append(_opnorm(val) / (float(y) ** sigma + float(y) ** (-sigma)))
    return {
        "beta": beta, "amplitude": amp, "r_squared": r2,
        "remainders": dict(zip([float(y) for y in y_grid], rem.tolist())),
        "envelope_constant": max(env) if env else float("nan"),
        "envelope_values": dict(zip([float(y) for y in envelope_grid], env)),
    }
