import math

import numpy as np
import pytest

from eistwist.hyperbolic import (
    BoundaryPoint,
    GroupElement,
    PointH,
    frobenius_mu,
    hyperbolic_distance,
    imaginary_of_action,
    moebius_apply,
    moebius_boundary,
    point_pair_invariant,
)

I = GroupElement.identity()
S = GroupElement(1, 2, 0, 1)
T = GroupElement(1, 0, 2, 1)


def random_elements(n, seed=0, max_len=12):
    rng = np.random.default_rng(seed)
    gens = [S, S.inverse(), T, T.inverse()]
    out = []
    for _ in range(n):
        g = I
        for _ in range(rng.integers(0, max_len)):
            g = g * gens[rng.integers(0, 4)]
        out.append(g)
    return out


def random_points(n, seed=1):
    rng = np.random.default_rng(seed)
    return [PointH(rng.uniform(-3, 3), rng.uniform(0.05, 5.0)) for _ in range(n)]


class TestGroupElement:
    def test_canonical_sign(self):
        g = GroupElement(-1, -2, 0, -1)
        assert g.c == 0 and g.a > 0
        h = GroupElement(0.5, 0, -1, 2)
        assert h.c > 0

    def test_det_normalized_after_products(self):
        g = I
        for _ in range(75):            # entries grow to ~1e57; det must stay put
            g = g * S * T * S.inverse() * T.inverse() * T
        a, b, c, d = g.entries()
        assert abs(a * d - b * c - 1.0) < 1e-11

    def test_rejects_negative_det(self):
        with pytest.raises(ValueError):
            GroupElement(1, 0, 0, -1)

    def test_inverse(self):
        for g in random_elements(10):
            assert (g * g.inverse()).is_identity()


class TestPoints:
    def test_pointh_rejects_lower_half(self):
        with pytest.raises(ValueError):
            PointH(0.0, -1.0)
        with pytest.raises(ValueError):
            PointH(0.0, 0.0)

    def test_infinity_is_a_tag(self):
        p = BoundaryPoint.infinity()
        assert p.infinite
        assert not p.close_to(BoundaryPoint(1e304))


class TestMoebius:
    def test_identity_fixes(self):
        z = PointH(0.3, 2.0)
        w = moebius_apply(I, z)
        assert w.x == pytest.approx(0.3) and w.y == pytest.approx(2.0)

    def test_inversion_fixes_i(self):
        g = GroupElement(0, -1, 1, 0)
        w = moebius_apply(g, PointH(0, 1))
        assert abs(w.x) < 1e-15 and w.y == pytest.approx(1.0)

    def test_translation(self):
        g = GroupElement(1, 1, 0, 1)
        w = moebius_apply(g, PointH(0, 1))
        assert w.x == pytest.approx(1.0) and w.y == pytest.approx(1.0)

    def test_group_action(self):
        pts = random_points(20)
        els = random_elements(20, seed=3)
        for g, h, z in zip(els, els[1:] + els[:1], pts):
            w1 = moebius_apply(g * h, z)
            w2 = moebius_apply(g, moebius_apply(h, z))
            assert abs(w1.x - w2.x) < 1e-10 and abs(w1.y - w2.y) < 1e-10

    def test_boundary_conventions(self):
        inv = GroupElement(0, -1, 1, 0)
        assert moebius_boundary(inv, BoundaryPoint.infinity()).close_to(BoundaryPoint(0.0))
        par = GroupElement(1, 1, 0, 1)
        assert moebius_boundary(par, BoundaryPoint.infinity()).infinite
        g = GroupElement(1, 0, 2, 1)
        assert moebius_boundary(g, BoundaryPoint(-0.5)).infinite

    def test_imaginary_of_action(self):
        assert imaginary_of_action(I, PointH(0.4, 2.3)) == pytest.approx(2.3, abs=1e-14)
        assert imaginary_of_action(GroupElement(0, -1, 1, 0), PointH(0, 1)) == pytest.approx(1.0)
        assert imaginary_of_action(GroupElement(1, 0, 2, 1), PointH(0, 1)) == pytest.approx(0.2)
        for g, z in zip(random_elements(20, seed=7), random_points(20, seed=8)):
            assert imaginary_of_action(g, z) == pytest.approx(moebius_apply(g, z).y, abs=1e-14)


class TestInvariants:
    def test_point_pair_basics(self):
        z = PointH(0.3, 1.4)
        assert point_pair_invariant(z, z) == 0.0
        assert point_pair_invariant(PointH(0, 1), PointH(0, 2)) == pytest.approx(0.5)

    def test_invariance_of_u_and_d(self):
        for g, (z, w) in zip(random_elements(30, seed=10),
                             zip(random_points(30, seed=11), random_points(30, seed=12))):
            u0 = point_pair_invariant(z, w)
            u1 = point_pair_invariant(moebius_apply(g, z), moebius_apply(g, w))
            assert abs(u1 - u0) <= 1e-10 * (1 + u0)
            d0 = hyperbolic_distance(z, w)
            d1 = hyperbolic_distance(moebius_apply(g, z), moebius_apply(g, w))
            assert abs(d1 - d0) <= 1e-9 * (1 + d0)

    def test_distance_examples(self):
        assert hyperbolic_distance(PointH(0, 1), PointH(0, 1)) == 0.0
        assert hyperbolic_distance(PointH(0, 1), PointH(0, math.e ** 2)) == pytest.approx(2.0)
        # u(i, 1+i) = 1, d = acosh(3/2)
        assert hyperbolic_distance(PointH(0, 1), PointH(1, 1)) == pytest.approx(
            math.acosh(1.5), abs=1e-10)

    def test_triangle_inequality(self):
        pts = random_points(60, seed=13)
        for z, w, v in zip(pts[::3], pts[1::3], pts[2::3]):
            assert (hyperbolic_distance(z, v) <=
                    hyperbolic_distance(z, w) + hyperbolic_distance(w, v) + 1e-9)

    def test_mu_examples(self):
        assert frobenius_mu(I) == pytest.approx(2.0)
        assert frobenius_mu(GroupElement(2, 0, 0, 0.5)) == pytest.approx(4.25)

    def test_mu_distance_comparison_diag(self):
        g = GroupElement(2, 0, 0, 0.5)
        e = math.exp(hyperbolic_distance(PointH(0, 1), moebius_apply(g, PointH(0, 1))))
        assert frobenius_mu(g) / 2 <= e <= frobenius_mu(g)

    def test_mu_distance_comparison_random(self):
        i = PointH(0, 1)
        for g in random_elements(300, seed=14):
            mu = frobenius_mu(g)
            e = math.exp(hyperbolic_distance(i, moebius_apply(g, i)))
            assert mu / 2 <= e * (1 + 1e-12) and e <= mu * (1 + 1e-12)

    def test_row_norm_inequality(self):
        rng = np.random.default_rng(15)
        for _ in range(300):
            c, d = rng.normal(size=2) * 3
            z = complex(rng.uniform(-3, 3), rng.uniform(0.05, 4))
            lhs = (z.imag ** 2 / (1 + abs(z) ** 2)) * (c * c + d * d)
            assert lhs <= abs(c * z + d) ** 2 * (1 + 1e-12)
