import math

import numpy as np
import pytest

from eistwist.group import Word, enumerate_ball
from eistwist.hyperbolic import frobenius_mu
from eistwist.representation import (
    Representation,
    check_unitary_at_cusps,
    cusp_eigendata,
    fit_growth_exponent,
    fixed_space_projection,
    make_representation,
    operator_norm,
    rep_of_word,
    rep_of_word_inverse,
    representation_from_config,
    trivial_representation,
)

E = lambda x: np.exp(2j * np.pi * x)


class TestRepOfWord:
    def test_empty_word(self, gamma2, rot_rep):
        assert np.allclose(rep_of_word(rot_rep, Word()), np.eye(2))

    def test_trivial_rep(self, gamma2, trivial_rep):
        assert np.allclose(rep_of_word(trivial_rep, Word((0, 2, 0))), [[1.0]])

    def test_ordered_product(self, gamma2, rot_rep):
        ref = rot_rep.images[0] @ rot_rep.images[2]
        assert np.max(np.abs(rep_of_word(rot_rep, Word((0, 2))) - ref)) < 1e-12

    def test_inverse_word(self, gamma2, rot_rep):
        w = Word((0, 2, 1))
        prod = rep_of_word(rot_rep, w) @ rep_of_word_inverse(gamma2, rot_rep, w)
        assert np.max(np.abs(prod - np.eye(2))) < 1e-10

    def test_invalid_index(self, rot_rep):
        with pytest.raises(ValueError):
            rep_of_word(rot_rep, Word((9,)))


class TestUnitarityChecks:
    def test_trivial_true(self, gamma2, trivial_rep):
        ok, _ = check_unitary_at_cusps(gamma2, trivial_rep)
        assert ok

    def test_nonunitary_parabolic_image_false(self, gamma2):
        d = np.diag([2.0, 0.5])
        rep = make_representation(
            gamma2, [d, np.linalg.inv(d), np.eye(2), np.eye(2)])
        ok, report = check_unitary_at_cusps(gamma2, rep)
        assert not ok and report[0] > 1e-6

    def test_only_cusp_stabilizers_tested(self, torus):
        # hyperbolic generators may map to arbitrary invertible matrices
        d = np.diag([3.0, 1 / 3.0])
        rep = make_representation(torus, [d, np.linalg.inv(d), np.eye(2), np.eye(2)])
        ok, _ = check_unitary_at_cusps(torus, rep)
        assert ok

    def test_inconsistent_inverses_rejected(self, gamma2):
        with pytest.raises(ValueError):
            make_representation(gamma2, [np.eye(2) * 2, np.eye(2) * 3,
                                         np.eye(2), np.eye(2)])


class TestProjections:
    def test_trivial_rep_full(self, gamma2, trivial_rep):
        assert np.allclose(fixed_space_projection(gamma2, trivial_rep, 0), [[1.0]])

    def test_no_fixed_space(self, gamma2):
        d = E(1.0 / 3.0) * np.eye(2)
        rep = make_representation(gamma2, [d, np.linalg.inv(d), d, np.linalg.inv(d)])
        P = fixed_space_projection(gamma2, rep, 0)
        assert np.max(np.abs(P)) == 0.0

    def test_partial_fixed_space(self, gamma2):
        d = np.diag([1.0, E(0.5)])
        rep = make_representation(gamma2, [d, np.linalg.inv(d),
                                           np.eye(2), np.eye(2)])
        P = fixed_space_projection(gamma2, rep, 0)
        assert np.allclose(P, np.diag([1.0, 0.0]), atol=1e-12)

    def test_projection_algebra(self, gamma2, rot_rep):
        for cusp in range(3):
            P = fixed_space_projection(gamma2, rot_rep, cusp)
            assert np.max(np.abs(P @ P - P)) < 1e-10
            assert np.max(np.abs(P - P.conj().T)) < 1e-10
            U = rep_of_word(rot_rep, gamma2.cusps[cusp].stabilizer_word)
            assert np.max(np.abs(U @ P - P)) < 1e-10

    def test_rejects_nonunitary(self, gamma2):
        d = np.diag([2.0, 0.5])
        rep = make_representation(gamma2, [d, np.linalg.inv(d),
                                           np.eye(2), np.eye(2)])
        with pytest.raises(ValueError):
            fixed_space_projection(gamma2, rep, 0)


class TestEigendata:
    def test_diag_quarter(self, gamma2):
        d = np.diag([1.0, 1j])
        rep = make_representation(gamma2, [d, np.linalg.inv(d),
                                           np.eye(2), np.eye(2)])
        ed = cusp_eigendata(gamma2, rep, 0)
        assert ed.nu == pytest.approx((0.0, 0.25))
        assert np.allclose(ed.projections[0], np.diag([1.0, 0.0]), atol=1e-12)
        assert np.allclose(ed.projections[1], np.diag([0.0, 1.0]), atol=1e-12)

    def test_zero_block_convention(self, gamma2):
        d = E(1.0 / 3.0) * np.eye(2)
        rep = make_representation(gamma2, [d, np.linalg.inv(d), d, np.linalg.inv(d)])
        ed = cusp_eigendata(gamma2, rep, 0)
        assert ed.nu[0] == 0.0
        assert np.max(np.abs(ed.projections[0])) == 0.0
        assert ed.nu[1] == pytest.approx(1.0 / 3.0)
        assert np.allclose(ed.projections[1], np.eye(2), atol=1e-12)

    def test_reconstruction_random_unitary(self, gamma2):
        rng = np.random.default_rng(5)
        M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        U, _ = np.linalg.qr(M)
        rep = make_representation(gamma2, [U, U.conj().T, np.eye(3), np.eye(3)])
        ed = cusp_eigendata(gamma2, rep, 0)
        recon = sum(E(nu) * P for nu, P in zip(ed.nu, ed.projections))
        assert np.max(np.abs(recon - U)) < 1e-9
        total = sum(ed.projections)
        assert np.max(np.abs(total - np.eye(3))) < 1e-9
        for i, Pi in enumerate(ed.projections):
            for j, Pj in enumerate(ed.projections):
                ref = Pi if i == j else 0.0
                assert np.max(np.abs(Pi @ Pj - ref)) < 1e-9


class TestOperatorNorm:
    def test_identity(self):
        assert operator_norm(np.eye(3)) == pytest.approx(1.0)

    def test_diag(self):
        assert operator_norm(np.diag([3.0, 1.0])) == pytest.approx(3.0, rel=1e-10)

    def test_nilpotent(self):
        assert operator_norm(np.array([[0, 1], [0, 0]])) == pytest.approx(1.0)

    def test_zero(self):
        assert operator_norm(np.zeros((2, 2))) == 0.0

    def test_against_svd(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            M = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
            assert operator_norm(M) == pytest.approx(
                np.linalg.svd(M, compute_uv=False)[0], rel=1e-9)


class TestGrowthFit:
    def test_trivial_degenerate(self, gamma2, trivial_rep):
        fit = fit_growth_exponent(gamma2, trivial_rep, 5, include_proof_bound=False)
        assert fit.sigma0 == pytest.approx(1.0 + 1e-6)
        assert fit.constant >= 1.0 - 1e-12

    def test_unitary_degenerate(self, gamma2, rot_rep):
        fit = fit_growth_exponent(gamma2, rot_rep, 5, include_proof_bound=False)
        assert fit.sigma0 == pytest.approx(1.0 + 1e-6)

    def test_nonunitary_bound_holds_on_ball(self, torus, torus_rep):
        fit = fit_growth_exponent(torus, torus_rep, 7, include_proof_bound=False)
        assert fit.sigma0 > 1.0
        for w, g in enumerate_ball(torus, 7):
            nrm = operator_norm(rep_of_word(torus_rep, w))
            bound = fit.constant * frobenius_mu(g) ** (fit.sigma0 - 1.0)
            assert nrm <= bound * (1 + 1e-9)

    def test_proof_bound_reported(self, torus, torus_rep):
        fit = fit_growth_exponent(torus, torus_rep, 5, tranche_L=3)
        assert fit.proof_sigma0 > 1.0
        assert fit.gen_norm_max == pytest.approx(1.4)

    def test_rejects_nonunitary_at_cusps(self, gamma2):
        d = np.diag([2.0, 0.5])
        rep = make_representation(gamma2, [d, np.linalg.inv(d),
                                           np.eye(2), np.eye(2)])
        with pytest.raises(ValueError):
            fit_growth_exponent(gamma2, rep, 4)


class TestNormProperties:
    def test_cusp_translation_invariance(self, torus, torus_rep):
        # ||chi(gamma_a gamma)|| = ||chi(gamma)|| for stabilizer elements
        stab = torus.cusps[0].stabilizer_word
        for w, g in enumerate_ball(torus, 4)[:60]:
            lhs = operator_norm(rep_of_word(torus_rep, stab) @ rep_of_word(torus_rep, w))
            rhs = operator_norm(rep_of_word(torus_rep, w))
            assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_submultiplicative(self, torus, torus_rep):
        ball = enumerate_ball(torus, 3)
        rng = np.random.default_rng(11)
        idx = rng.integers(0, len(ball), size=(25, 2))
        for i, j in idx:
            a = rep_of_word(torus_rep, ball[i][0])
            b = rep_of_word(torus_rep, ball[j][0])
            assert operator_norm(a @ b) <= (operator_norm(a) * operator_norm(b)
                                            * (1 + 1e-9))

    def test_row_coordinate_bound(self, torus, torus_rep):
        # ||chi(gamma)|| <= C (c^2+d^2)^{sigma0-1} in cusp-normalized
        # coordinates; C is fitted on the L=5 ball with the conservative
        # abscissa (the K^k proof route; the least-squares fit is known to
        # underestimate on longer words) and then checked on the L=7 ball
        fit = fit_growth_exponent(torus, torus_rep, 5, tranche_L=4)
        s0 = max(fit.sigma0, fit.proof_sigma0)
        sig = torus.cusps[0].sigma
        sig_inv = torus.cusps[0].sigma_inv
        worst = 0.0
        for w, g in enumerate_ball(torus, 5):
            tau = sig_inv * g * sig
            c2d2 = tau.c ** 2 + tau.d ** 2
            nrm = operator_norm(rep_of_word(torus_rep, w))
            worst = max(worst, nrm / c2d2 ** (s0 - 1.0))
        for w, g in enumerate_ball(torus, 7):
            tau = sig_inv * g * sig
            c2d2 = tau.c ** 2 + tau.d ** 2
            nrm = operator_norm(rep_of_word(torus_rep, w))
            assert nrm <= 1.05 * worst * c2d2 ** (s0 - 1.0)


class TestConfigRepresentation:
    def test_round_trip(self, gamma2, rot_rep):
        cfg = {"dim": 2, "images": {
            "0": [[[v.real, v.imag] for v in row] for row in rot_rep.images[0]],
            "2": [[[v.real, v.imag] for v in row] for row in rot_rep.images[2]],
        }}
        rep = representation_from_config(gamma2, cfg)
        for a, b in zip(rep.images, rot_rep.images):
            assert np.max(np.abs(a - b)) < 1e-12

    def test_rejects_nonunitary_at_cusps(self, gamma2):
        cfg = {"dim": 2, "images": {
            "0": [[[2.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [0.5, 0.0]]],
            "2": [[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], [1.0, 0.0]]],
        }}
        with pytest.raises(ValueError):
            representation_from_config(gamma2, cfg)

    def test_missing_generator(self, gamma2):
        with pytest.raises(ValueError):
            representation_from_config(gamma2, {"dim": 1, "images": {"0": [[[1.0, 0.0]]]}})
