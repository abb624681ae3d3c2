import cmath
import math

import numpy as np
import pytest

from eistwist.hyperbolic import PointH
from eistwist.special import (
    GreenTable,
    adaptive_quad,
    e_of,
    fourier_integral_mode,
    fourier_integral_zero,
    k_bessel,
    log_gamma,
    quad_on_panels,
    resolvent_green,
    resolvent_green_frozen,
    whittaker,
    whittaker_profile,
)

# frozen oracle values, computed with mpmath at 30 digits
# (see the module docstrings: the oracle is independent of the evaluation path)
LOG_GAMMA_ORACLE = [
    ((3 + 2j), (-0.03163905937396119 + 2.022193197501327j)),
    ((-2.5 + 1j), (-2.3441906524655924 - 8.304127986657926j)),
    ((0.5 + 0j), (0.5723649429247001 + 0j)),
    ((-7.3 - 0.4j), (-8.57182823239658 + 23.75734131920661j)),
]

FOURIER_ZERO_ORACLE = [
    ((2.5027033068231193 + 0.6583176596280784j), 2.646494799778456,
     (0.002939361580237645 - 0.02601518371843821j)),
    ((2.3342096639306007 + 0.1412660218314743j), 2.9390558790918897,
     (0.02516874239004563 - 0.009132463579018183j)),
    ((2.4745073443787766 + 1.1790964579154308j), 0.8202840816888647,
     (2.6388105873117347 + 0.45447339809285836j)),
    ((1.7908490633702479 + 0.5561970363488719j), 2.8169124721215044,
     (0.020210249452136685 - 0.11000755271445166j)),
    ((2.2165032641774625 + 1.234142419906245j), 1.6085354970683279,
     (0.01297527400347778 - 0.24983445677344554j)),
]

FOURIER_MODE_ORACLE = [
    ((1.1863058270341207 + 0.6655017444190018j), 0.40848933537709803, 1.4474965986830972,
     (0.06994103918709839 + 0.011902030087498456j)),
    ((2.0887491581451356 + 0.425431161755842j), 1.9501866414713356, 1.8396816819832966,
     (1.0299867174490601e-09 + 3.562547036275555e-10j)),
    ((2.1232519450253955 + 0.23356644942236107j), -1.093425706335958, 0.7314342381013217,
     (0.18105681989171155 + 0.058461825328309756j)),
    ((1.9611832205121729 + 0.8937145870893806j), -1.944766545138157, 0.9887380372072279,
     (3.3711527648575064e-05 + 0.00013722910301337577j)),
    ((1.429781500259277 + 0.5634669735309695j), -0.6221013104432856, 1.2135573893389007,
     (0.03499579695828863 + 0.01319736218571976j)),
]

K_BESSEL_ORACLE = [
    (0.5, 2.0, (0.11993777196806145 + 0j)),
    ((1.7 + 0.9j), 0.7, (0.5354203125946784 + 1.7695421044677173j)),
    (2.5, 5.0, (0.006495775004385758 + 0j)),
    ((-1.2 + 3j), 1.3, (-0.03750980801934368 - 0.01596959746539864j)),
]


class TestLogGamma:
    def test_gamma_one_is_zero(self):
        assert abs(log_gamma(1.0)) < 1e-14

    def test_half(self):
        assert log_gamma(0.5).real == pytest.approx(math.log(math.sqrt(math.pi)))

    @pytest.mark.parametrize("s,ref", LOG_GAMMA_ORACLE)
    def test_against_oracle(self, s, ref):
        assert abs(log_gamma(s) - ref) <= 1e-12 * abs(ref)

    def test_poles_raise(self):
        for s in (0.0, -1.0, -7.0):
            with pytest.raises(ValueError):
                log_gamma(s)


class TestKBessel:
    def test_half_order_closed_form(self):
        for y in (0.5, 1.0, 2.0, 10.0):
            ref = math.sqrt(math.pi / (2 * y)) * math.exp(-y)
            assert abs(k_bessel(0.5, y) - ref) <= 1e-9 * ref

    @pytest.mark.parametrize("s,y,ref", K_BESSEL_ORACLE)
    def test_spot_values(self, s, y, ref):
        assert abs(k_bessel(s, y) - ref) <= 1e-9 * abs(ref)

    def test_symmetry_in_order(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            s = complex(rng.uniform(-3, 3), rng.uniform(-3, 3))
            y = rng.uniform(0.3, 6.0)
            a, b = k_bessel(s, y), k_bessel(-s, y)
            assert abs(a - b) <= 1e-10 * max(abs(a), 1e-300)

    def test_decay_bound(self):
        k2 = {sr: k_bessel(sr, 2.0) for sr in (-3.0, -1.5, 0.0, 1.5, 3.0)}
        rng = np.random.default_rng(3)
        for y in (5.0, 8.0, 12.0):
            for sr in k2:
                s = complex(sr, rng.uniform(-2, 2))
                bound = math.exp(-y / 2) * abs(k2[sr])
                assert abs(k_bessel(s, y)) <= bound * (1 + 1e-9)

    def test_rejects_bad_y(self):
        with pytest.raises(ValueError):
            k_bessel(1.0, -2.0)


class TestWhittaker:
    def test_real_positive_on_axis(self):
        v = whittaker(2.5, PointH(0.0, 1.3))
        assert v.imag == pytest.approx(0.0, abs=1e-15) and v.real > 0

    def test_phase_factorization(self):
        s = 1.7 + 0.4j
        z = PointH(0.37, 0.9)
        assert abs(whittaker(s, z) - e_of(0.37) * whittaker(s, PointH(1e-300, 0.9))) < 1e-12

    def test_decay_ratio(self):
        s = 2.5
        ratio = abs(whittaker_profile(s, 1.0, 8.0) / whittaker_profile(s, 1.0, 4.0))
        assert ratio <= math.exp(-4 * math.pi) * math.sqrt(2) * (1 + 1e-3)

    def test_negative_frequency_uses_abs(self):
        s = 2.0 + 0.3j
        assert whittaker_profile(s, -1.5, 0.8) == pytest.approx(
            whittaker_profile(s, 1.5, 0.8))


class TestFourierIntegrals:
    def test_arctan_case(self):
        assert abs(fourier_integral_zero(1.0, 1.0) - math.pi) <= 1e-12 * math.pi

    def test_s2(self):
        assert abs(fourier_integral_zero(2.0, 1.0) - math.pi / 2) <= 1e-10

    @pytest.mark.parametrize("s,y,ref", FOURIER_ZERO_ORACLE)
    def test_zero_mode_oracle(self, s, y, ref):
        assert abs(fourier_integral_zero(s, y) - ref) <= 1e-7 * abs(ref) + 1e-12

    @pytest.mark.parametrize("s,r,y,ref", FOURIER_MODE_ORACLE)
    def test_mode_oracle(self, s, r, y, ref):
        assert abs(fourier_integral_mode(s, r, y) - ref) <= 1e-7 * abs(ref) + 1e-12

    def test_mode_even_in_r(self):
        s, y = 1.5 + 0.5j, 0.9
        assert fourier_integral_mode(s, 0.7, y) == pytest.approx(
            fourier_integral_mode(s, -0.7, y))

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            fourier_integral_zero(0.4, 1.0)
        with pytest.raises(ValueError):
            fourier_integral_mode(1.5, 0.0, 1.0)


class TestResolventGreen:
    def test_log_singularity(self):
        s = 1.3 + 0.4j
        vals = [resolvent_green(s, u) + math.log(u) / (4 * math.pi)
                for u in (1e-2, 1e-4, 1e-6)]
        assert max(abs(v) for v in vals) < 1.0
        assert abs(vals[1] - vals[2]) < 5e-3  # approaching a limit

    def test_power_decay(self):
        s = 1.3 + 0.4j
        vals = [abs(resolvent_green(s, u)) * u ** s.real for u in (1e2, 1e3, 1e4)]
        assert max(vals) < 1.0
        assert max(vals) / min(vals) < 1.5

    def test_derivative_near_zero(self):
        s = 1.6
        u = 1e-5
        d = (resolvent_green(s, u * 1.01) - resolvent_green(s, u * 0.99)) / (0.02 * u)
        ref = -1.0 / (4 * math.pi * u)
        assert abs(d - ref) <= 5e-2 * abs(ref)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            resolvent_green(-0.2, 1.0)
        with pytest.raises(ValueError):
            resolvent_green(1.5, 0.0)

    def test_eigenfunction_property(self):
        # Delta G_s(u(z, w)) = s(1-s) G_s(u(z,w)) for the positive Laplacian,
        # finite differences on a frozen quadrature rule so the error is
        # smooth across the stencil
        s = 1.8
        w = complex(0.1, 1.0)
        for zc in (complex(0.6, 1.5), complex(-0.4, 0.8), complex(0.2, 2.2),
                   complex(1.1, 1.2), complex(-0.9, 1.7)):
            def u_of(z):
                return abs(z - w) ** 2 / (z.imag * w.imag)

            g = resolvent_green_frozen(s, u_of(zc), rel_tol=1e-12)
            h = 1e-3

            def f(z):
                return g(u_of(z))

            lap = -(zc.imag ** 2) * (
                f(zc + h) + f(zc - h) + f(zc + 1j * h) + f(zc - 1j * h) - 4 * f(zc)
            ) / (h * h)
            val = lap - s * (1 - s) * f(zc)
            assert abs(val) <= 1e-4 * abs(s * (1 - s) * f(zc))

    def test_green_table_matches_direct(self):
        s = 1.4 + 0.2j
        gt = GreenTable(s, n=2000)
        for u in (1e-6, 1e-3, 0.1, 1.0, 30.0, 1e4):
            assert abs(gt(u) - resolvent_green(s, u)) <= 2e-6 * max(abs(resolvent_green(s, u)), 1e-12)


class TestQuadrature:
    def test_known_integral(self):
        val = adaptive_quad(lambda t: math.exp(-t * t), -8.0, 8.0, rel_tol=1e-12)
        assert abs(val - math.sqrt(math.pi)) < 1e-12

    def test_complex_and_vector(self):
        val = adaptive_quad(lambda t: cmath.exp(1j * t), 0.0, math.pi / 2)
        assert abs(val - (1 + 1j)) < 1e-12
        vec = adaptive_quad(lambda t: np.array([1.0, t]), 0.0, 2.0)
        assert np.allclose(vec, [2.0, 2.0])

    def test_frozen_panels_reproduce(self):
        f = lambda t: math.exp(-3 * t) * math.sin(5 * t)
        val, err, panels = adaptive_quad(f, 0.0, 3.0, rel_tol=1e-12, return_panels=True)
        again = quad_on_panels(f, panels)
        assert abs(val - again) < 1e-14

    def test_continuity_in_parameters(self):
        # smoke test against branch-cut mistakes
        for f, args in ((k_bessel, (1.2 + 0.8j, 1.4)),
                        (fourier_integral_zero, (1.7 + 0.3j, 1.1)),
                        (resolvent_green, (1.5 + 0.6j, 0.7))):
            base = f(*args)
            bumped = f(args[0] + 1e-6, *args[1:])
            assert abs(bumped - base) < 1e-3 * max(abs(base), 1e-12)
