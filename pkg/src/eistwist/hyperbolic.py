"""Numerical primitives for the upper half-plane and PSL(2,R).

Group elements are unit-determinant 2x2 real matrices modulo sign, stored as
four doubles with a canonical sign so that they can be deduplicated during
word enumeration.  All operations here are pure functions on immutable
values and safe to call concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DET_TOL = 1e-12
EQ_TOL = 1e-9
KEY_SCALE = 1e6  # rounding grid for hash keys


def _canonical(a, b, c, d):
    """Renormalize det to 1 and fix the sign: first nonzero of (c, a) > 0."""
    det = a * d - b * c
    if abs(det - 1.0) > DET_TOL:
        if det <= 0.0:
            raise ValueError(f"matrix has nonpositive determinant {det}")
        r = math.sqrt(det)
        a, b, c, d = a / r, b / r, c / r, d / r
    if c < 0.0 or (c == 0.0 and a < 0.0):
        a, b, c, d = -a, -b, -c, -d
    return a, b, c, d


@dataclass(frozen=True)
class GroupElement:
    """Element of PSL(2,R): (a b; c d) with ad - bc = 1, canonical sign."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        a, b, c, d = _canonical(self.a, self.b, self.c, self.d)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)

    @staticmethod
    def identity() -> "GroupElement":
        return GroupElement(1.0, 0.0, 0.0, 1.0)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "GroupElement":
        return GroupElement(self.d, -self.b, -self.c, self.a)

    def trace(self) -> float:
        return self.a + self.d

    def is_parabolic(self, tol: float = EQ_TOL) -> bool:
        return abs(abs(self.trace()) - 2.0) <= tol and not self.is_identity(tol)

    def is_identity(self, tol: float = EQ_TOL) -> bool:
        return (abs(self.a - 1.0) <= tol and abs(self.b) <= tol
                and abs(self.c) <= tol and abs(self.d - 1.0) <= tol)

    def entries(self):
        return (self.a, self.b, self.c, self.d)

    def key(self):
        """Rounded entry tuple, usable as a dict key for deduplication."""
        return (round(self.a * KEY_SCALE), round(self.b * KEY_SCALE),
                round(self.c * KEY_SCALE), round(self.d * KEY_SCALE))

    def close_to(self, other: "GroupElement", tol: float = EQ_TOL) -> bool:
        return (abs(self.a - other.a) <= tol and abs(self.b - other.b) <= tol
                and abs(self.c - other.c) <= tol and abs(self.d - other.d) <= tol)

    def __hash__(self):
        return hash(self.key())

    def __eq__(self, other):
        if not isinstance(other, GroupElement):
            return NotImplemented
        return self.close_to(other)


@dataclass(frozen=True)
class PointH:
    """Point x + iy of the upper half-plane, y > 0 strictly."""

    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0.0:
            raise ValueError(f"point not in upper half-plane: y = {self.y}")

    @staticmethod
    def from_complex(z: complex) -> "PointH":
        return PointH(z.real, z.imag)

    def as_complex(self) -> complex:
        return complex(self.x, self.y)


@dataclass(frozen=True)
class BoundaryPoint:
    """Point of the boundary R union {infinity}; infinity is an exact tag."""

    value: float = 0.0
    infinite: bool = False

    @staticmethod
    def infinity() -> "BoundaryPoint":
        return BoundaryPoint(0.0, True)

    def close_to(self, other: "BoundaryPoint", tol: float = EQ_TOL) -> bool:
        if self.infinite or other.infinite:
            return self.infinite and other.infinite
        return abs(self.value - other.value) <= tol


def moebius_apply(g: GroupElement, z: PointH) -> PointH:
    """Linear fractional action (az+b)/(cz+d) on the upper half-plane."""
    w = complex(z.x, z.y)
    den = g.c * w + g.d
    num = g.a * w + g.b
    res = num / den
    # imaginary part via the stable formula y/|cz+d|^2
    y = z.y / (den.real * den.real + den.imag * den.imag)
    return PointH(res.real, y)


def moebius_boundary(g: GroupElement, p: BoundaryPoint) -> BoundaryPoint:
    """Boundary action with the usual conventions at infinity and the pole."""
    if p.infinite:
        if g.c == 0.0:
            return BoundaryPoint.infinity()
        return BoundaryPoint(g.a / g.c)
    den = g.c * p.value + g.d
    if abs(den) <= 1e-14 * max(1.0, abs(g.c * p.value), abs(g.d)):
        return BoundaryPoint.infinity()
    return BoundaryPoint((g.a * p.value + g.b) / den)


def imaginary_of_action(g: GroupElement, z: PointH) -> float:
    """Im(gz) = y / |cz + d|^2, without forming the full image point."""
    cr = g.c * z.x + g.d
    ci = g.c * z.y
    return z.y / (cr * cr + ci * ci)


def point_pair_invariant(z: PointH, w: PointH) -> float:
    """u(z,w) = |z-w|^2 / (Im z Im w); vanishes iff z = w."""
    dx = z.x - w.x
    dy = z.y - w.y
    return (dx * dx + dy * dy) / (z.y * w.y)


def hyperbolic_distance(z: PointH, w: PointH) -> float:
    """Geodesic distance, via cosh d = 1 + u/2."""
    return math.acosh(1.0 + 0.5 * point_pair_invariant(z, w))


def frobenius_mu(g: GroupElement) -> float:
    """Squared Frobenius norm a^2+b^2+c^2+d^2; equals 2 exactly on rotations."""
    return g.a * g.a + g.b * g.b + g.c * g.c + g.d * g.d
