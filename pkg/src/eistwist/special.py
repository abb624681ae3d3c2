"""Special functions: complex log-gamma, K-Bessel, Whittaker profiles, the
two Fourier integrals of the constant/nonconstant modes, and the resolvent
Green kernel G_s.

Everything is evaluated through one adaptive Gauss-Kronrod (G7/K15)
bisection routine with an embedded error estimate, absolute floor 1e-15.
All complex powers are principal branch; the defining integrands only take
powers of positive reals, so no branch cuts are crossed.
"""

from __future__ import annotations

import cmath
import heapq
import math

import numpy as np

TWO_PI = 2.0 * math.pi

# ----------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature
# ----------------------------------------------------------------------

# K15 nodes (positive half) and weights; G7 weights sit on nodes 1,3,5,7.
_XGK = (0.991455371120813, 0.949107912342759, 0.864864423359769,
        0.741531185599394, 0.586087235467691, 0.405845151377397,
        0.207784955007898, 0.0)
_WGK = (0.022935322010529, 0.063092092629979, 0.104790010322250,
        0.140653259715525, 0.169004726639267, 0.190350578064785,
        0.204432940075298, 0.209482141084728)
_WG = (0.129484966168870, 0.279705391489277, 0.381830050505119,
       0.417959183673469)

_NODES = np.array([-x for x in _XGK[:-1]] + [0.0] + [x for x in reversed(_XGK[:-1])])
_WK = np.array(list(_WGK[:-1]) + [_WGK[-1]] + list(reversed(_WGK[:-1])))
_WG_FULL = np.zeros(15)
for _i, _w in zip((1, 3, 5, 7), _WG):
    _WG_FULL[_i] = _w
    _WG_FULL[14 - _i] = _w
_WG_FULL[7] = _WG[3]


def _gk15(f, a, b):
    """One Gauss-Kronrod panel: returns (kronrod value, error estimate).

    Works for scalar or vector-valued integrands (error = max-abs then).
    """
    h = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.array([f(mid + h * t) for t in _NODES])
    k = h * np.tensordot(_WK, vals, axes=(0, 0))
    g = h * np.tensordot(_WG_FULL, vals, axes=(0, 0))
    return k, float(np.max(np.abs(k - g)))


def adaptive_quad(f, a, b, rel_tol=1e-10, abs_floor=1e-15, max_panels=4000,
                  return_panels=False):
    """Globally adaptive bisection over [a, b] for a complex-valued f.

    Splits the panel with the largest embedded error until the summed error
    estimate drops below max(abs_floor, rel_tol * |integral|).
    """
    val, err = _gk15(f, a, b)
    heap = [(-err, a, b, val, err)]
    total = val
    toterr = err
    n = 1
    while toterr > max(abs_floor, rel_tol * float(np.max(np.abs(total)))) and n < max_panels:
        _, pa, pb, pval, perr = heapq.heappop(heap)
        mid = 0.5 * (pa + pb)
        v1, e1 = _gk15(f, pa, mid)
        v2, e2 = _gk15(f, mid, pb)
        total += v1 + v2 - pval
        toterr += e1 + e2 - perr
        heapq.heappush(heap, (-e1, pa, mid, v1, e1))
        heapq.heappush(heap, (-e2, mid, pb, v2, e2))
        n += 1
    if return_panels:
        panels = sorted((item[1], item[2]) for item in heap)
        return total, toterr, panels
    return total


def quad_on_panels(f, panels):
    """Re-evaluate an integral on a frozen panel subdivision.

    Reusing panels across nearby parameter values makes the quadrature error
    a smooth function of the parameter, which finite differences need.
    """
    total = 0.0 + 0.0j
    for a, b in panels:
        v, _ = _gk15(f, a, b)
        total += v
    return total


# ----------------------------------------------------------------------
# log-gamma (Lanczos, g = 7, 9 terms)
# ----------------------------------------------------------------------

_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_TWO_PI = 0.5 * math.log(TWO_PI)


def log_gamma(s) -> complex:
    """Principal-branch log Gamma; raises at the poles 0, -1, -2, ..."""
    s = complex(s)
    if abs(s.imag) < 1e-14 and s.real <= 0.5 and abs(s.real - round(s.real)) < 1e-14:
        raise ValueError(f"log_gamma pole at s = {s}")
    if s.real >= 0.5:
        return _lanczos(s)
    # lift into the half-plane Re >= 0.5 by the recurrence
    # loggamma(s) = loggamma(s + m) - sum log(s + j)
    m = int(math.ceil(0.5 - s.real))
    shift = 0.0 + 0.0j
    for j in range(m):
        shift += cmath.log(s + j)
    return _lanczos(s + m) - shift


def _lanczos(s: complex) -> complex:
    x = _LANCZOS_C[0]
    for k in range(1, 9):
        x += _LANCZOS_C[k] / (s - 1.0 + k)
    t = s + _LANCZOS_G - 0.5
    return _HALF_LOG_TWO_PI + (s - 0.5) * cmath.log(t) - t + cmath.log(x)


def gamma_ratio(num, den) -> complex:
    """Gamma(num)/Gamma(den), computed in log space."""
    return cmath.exp(log_gamma(num) - log_gamma(den))


# ----------------------------------------------------------------------
# K-Bessel and Whittaker
# ----------------------------------------------------------------------

def k_bessel(s, y: float, rel_tol=1e-10) -> complex:
    """K_s(y) = int_0^inf exp(-y cosh x) cosh(s x) dx for y > 0.

    The integrand is truncated where exp(-y cosh x + |Re s| x) < 1e-19.
    Manifestly symmetric under s -> -s.
    """
    if y <= 0.0:
        raise ValueError("k_bessel requires y > 0")
    s = complex(s)
    sr = abs(s.real)
    x_max = math.acosh(max(46.0 / y, 1.5))
    while y * math.cosh(x_max) - sr * x_max < 45.0:
        x_max += 0.5

    def integrand(x):
        return math.exp(-y * math.cosh(x)) * cmath.cosh(s * x)

    return adaptive_quad(integrand, 0.0, x_max, rel_tol=rel_tol)


def whittaker_profile(s, f: float, y: float) -> complex:
    """Radial part 2 sqrt(|f| y) K_{s-1/2}(2 pi |f| y) of the mode profile."""
    fy = abs(f) * y
    return 2.0 * math.sqrt(fy) * k_bessel(s - 0.5, TWO_PI * fy)


def whittaker(s, z, frequency: float = 1.0) -> complex:
    """Whittaker profile at frequency f: 2 sqrt(|f|y) K_{s-1/2}(2pi|f|y) e(fx).

    ``z`` is a PointH or complex; the default frequency 1 gives the classical
    normalization.  Negative frequencies take |f| in the radial factor and
    keep the signed phase, matching the Fourier-mode integrals.
    """
    x, y = (z.x, z.y) if hasattr(z, "x") else (z.real, z.imag)
    if y <= 0:
        raise ValueError("whittaker requires Im z > 0")
    return whittaker_profile(s, frequency, y) * e_of(frequency * x)


def e_of(x: float) -> complex:
    """e(x) = exp(2 pi i x)."""
    return cmath.exp(2j * math.pi * x)


# ----------------------------------------------------------------------
# Fourier integrals of (t^2+y^2)^{-s}
# ----------------------------------------------------------------------

def fourier_integral_zero(s, y: float) -> complex:
    """int_R (t^2+y^2)^{-s} dt = sqrt(pi) Gamma(s-1/2)/Gamma(s) y^{1-2s}."""
    s = complex(s)
    if s.real <= 0.5:
        raise ValueError("fourier_integral_zero requires Re(s) > 1/2")
    return math.sqrt(math.pi) * gamma_ratio(s - 0.5, s) * cmath.exp((1 - 2 * s) * math.log(y))


def fourier_integral_mode(s, r: float, y: float) -> complex:
    """int_R (t^2+y^2)^{-s} e(-rt) dt for r != 0, via the K-Bessel function.

    Equals (2 pi^s / Gamma(s)) (|r|/y)^{s-1/2} K_{s-1/2}(2 pi |r| y).
    """
    if r == 0.0:
        raise ValueError("r = 0: use fourier_integral_zero")
    s = complex(s)
    if s.real <= 0.5:
        raise ValueError("fourier_integral_mode requires Re(s) > 1/2")
    pref = cmath.exp(s * math.log(math.pi) - log_gamma(s)
                     + (s - 0.5) * (math.log(abs(r)) - math.log(y)))
    return 2.0 * pref * k_bessel(s - 0.5, TWO_PI * abs(r) * y)


# ----------------------------------------------------------------------
# resolvent Green kernel
# ----------------------------------------------------------------------

def _green_integrand(s, u):
    # the defining integral is stated in the 4-normalized point-pair
    # invariant; as a function of u = |z-w|^2/(Im z Im w) the argument is u/4,
    # which is what makes (Delta - s(1-s)) G_s(u(z,w)) vanish
    q = 0.25 * u

    def integrand(theta):
        sn = math.sin(theta)
        cs = math.cos(theta)
        if sn == 0.0 or cs == 0.0:
            return 0.0j
        return 2.0 * cmath.exp((2.0 * s - 1.0) * math.log(sn * cs)
                               - s * math.log(sn * sn + q))
    return integrand


def resolvent_green(s, u: float, rel_tol=1e-9) -> complex:
    """Green kernel of Delta - s(1-s) as a function of the point-pair
    invariant u = u(z,w): (1/4pi) int_0^1 (xi(1-xi))^{s-1} (xi+u/4)^{-s} dxi.

    Evaluated after xi = sin^2(theta), which removes the endpoint
    singularities of the beta factor for Re(s) >= 1/2.  Near u = 0 it
    behaves as -(log u)/4pi + O(1); for large u it decays like u^{-Re s}.
    """
    s = complex(s)
    if s.real <= 0.0:
        raise ValueError("resolvent_green requires Re(s) > 0")
    if u <= 0.0:
        raise ValueError("resolvent_green requires u > 0")
    val = adaptive_quad(_green_integrand(s, u), 0.0, 0.5 * math.pi, rel_tol=rel_tol)
    return val / (4.0 * math.pi)


def resolvent_green_frozen(s, u_ref: float, rel_tol=1e-11):
    """Return G(u) evaluated on a panel subdivision frozen at u_ref.

    The frozen rule makes u -> G(u) smooth to machine precision near u_ref,
    so it can be differentiated by finite differences.
    """
    s = complex(s)
    _, _, panels = adaptive_quad(_green_integrand(s, u_ref), 0.0, 0.5 * math.pi,
                                 rel_tol=rel_tol, return_panels=True)

    def frozen(u):
        return quad_on_panels(_green_integrand(s, u), panels) / (4.0 * math.pi)

    return frozen


class GreenTable:
    """Cubic-spline tabulation of u -> G_s(u) on a log grid.

    Used where G_s is evaluated many times (resolvent application, kernel
    grids); the spline is smooth, which keeps quadrature errors correlated
    across nearby evaluation points.
    """

    def __init__(self, s, u_min=1e-9, u_max=1e6, n=6000):
        from scipy.interpolate import CubicSpline

        self.s = complex(s)
        self.u_min = u_min
        self.u_max = u_max
        grid = np.exp(np.linspace(math.log(u_min), math.log(u_max), n))
        vals = np.array([resolvent_green(self.s, u, rel_tol=1e-11) for u in grid])
        self._log_grid = np.log(grid)
        self._spline_re = CubicSpline(self._log_grid, vals.real)
        self._spline_im = CubicSpline(self._log_grid, vals.imag)
        # near-zero continuation: G_s(u) = -log(u)/4pi + c0 + O(u log u)
        self._c0 = vals[0] + math.log(grid[0]) / (4.0 * math.pi)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        scalar = u.ndim == 0
        u = np.atleast_1d(u)
        out = np.empty(u.shape, dtype=complex)
        small = u < self.u_min
        big = u > self.u_max
        mid = ~(small | big)
        if mid.any():
            lu = np.log(u[mid])
            out[mid] = self._spline_re(lu) + 1j * self._spline_im(lu)
        if small.any():
            out[small] = -np.log(u[small]) / (4.0 * math.pi) + self._c0
        if big.any():
            # decay like u^{-s}; extrapolate from the table edge
            edge = self._spline_re(self._log_grid[-1]) + 1j * self._spline_im(self._log_grid[-1])
            out[big] = edge * np.exp(-self.s * (np.log(u[big]) - self._log_grid[-1]))
        return out[0] if scalar else out
