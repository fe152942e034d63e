import math

import numpy as np
import pytest

from bergman import geometry as G
from bergman import holo as H
from bergman import measures as M
from bergman import sampling as S
from bergman import weights as W

from conftest import random_ball_points


@pytest.fixture(scope="module")
def basis1():
    return H.MultiIndexBasis(1, 10)


class TestPairIntegral:
    def test_single_atom_is_point_evaluation(self, basis1):
        mu = M.AtomicMeasure([[0.4 + 0.2j]], [1.3])
        f = H.HoloFunction.monomial(basis1, [2])
        g = H.HoloFunction.monomial(basis1, [1])
        z0 = 0.4 + 0.2j
        assert M.pair_integral(f, g, mu) == pytest.approx(1.3 * z0**2 * np.conj(z0))

    def test_radial_orthonormality(self, basis1, w_pow1):
        mu = M.radial_density_from_weight(w_pow1)
        norms = basis1.monomial_norm_sq(w_pow1)
        for i, j in ((0, 0), (3, 3), (2, 5)):
            f = H.HoloFunction(basis1, np.eye(basis1.size)[i] / math.sqrt(norms[i]))
            g = H.HoloFunction(basis1, np.eye(basis1.size)[j] / math.sqrt(norms[j]))
            expect = 1.0 if i == j else 0.0
            assert M.pair_integral(f, g, mu) == pytest.approx(expect, abs=1e-12)

    def test_zero_measure(self, basis1):
        mu = M.AtomicMeasure(np.zeros((0, 1), complex), np.zeros(0))
        f = H.HoloFunction.monomial(basis1, [0])
        assert M.pair_integral(f, f, mu) == 0.0

    def test_atomic_matches_direct_summation(self, basis1, rng):
        pts = random_ball_points(rng, 1, 12, rmax=0.8)
        masses = rng.uniform(0.1, 2.0, 12)
        mu = M.AtomicMeasure(pts, masses)
        f = H.HoloFunction.random(basis1, rng)
        g = H.HoloFunction.random(basis1, rng)
        direct = complex(np.sum(masses * f(pts) * np.conj(g(pts))))
        assert M.pair_integral(f, g, mu) == direct  # bit-for-bit

    def test_ballsum_against_radial_oracle(self, basis1, w_const1):
        # one ball centered at the origin is a radial measure: compare the
        # QMC route against the exact radial-moment route
        mu = M.BallSumMeasure([[0.0 + 0j]], [1.0], 0.5)
        f = H.HoloFunction.monomial(basis1, [1])
        got = M.pair_integral(f, f, mu, rtol=0.05)
        exact = 2 * (0.5**4) / 4.0  # 2 int_0^0.5 r^3 dr
        assert got.real == pytest.approx(exact, rel=2e-3)


class TestRestriction:
    def test_atom_survives_only_its_annulus(self, grid_const1):
        mu = M.AtomicMeasure([[0.8 + 0j]], [1.0])
        sizes = [len(M.restrict_to_annulus(mu, grid_const1, k).points) for k in range(4)]
        assert sizes == [0, 1, 0, 0]

    def test_partition_of_mass(self, grid_const1, rng):
        pts = random_ball_points(rng, 2, 40, rmax=grid_const1.radii[-1] - 1e-3)
        grid2 = W.dyadic_radii(W.normalize("constant", n=2), 12)
        mu = M.AtomicMeasure(pts, np.ones(40))
        total = sum(
            M.total_mass(M.restrict_to_annulus(mu, grid2, k)) for k in range(grid2.kmax + 1)
        )
        assert total == pytest.approx(40.0)  # central ball merged into k = 0

    def test_radial_partition(self, w_const1, grid_const1):
        from scipy import integrate

        mu = M.radial_density_from_weight(w_const1)
        total = sum(
            M.total_mass(M.restrict_to_annulus(mu, grid_const1, k))
            for k in range(grid_const1.kmax + 1)
        )
        # the annuli cover {|z| < r_(kmax+1)} (central ball merged into k = 0)
        covered = 2 * integrate.quad(
            lambda r: r * w_const1.rho(r), 0.0, grid_const1.radii[-1]
        )[0]
        assert total == pytest.approx(covered, rel=1e-9)

    def test_empty_annulus(self, grid_const1):
        mu = M.AtomicMeasure([[0.1 + 0j]], [1.0])
        mk = M.restrict_to_annulus(mu, grid_const1, 5)
        assert M.total_mass(mk) == 0.0


class TestMasses:
    def test_atom_in_own_box(self):
        mu = M.AtomicMeasure([[0.5 + 0j]], [0.7])
        assert M.box_mass(mu, np.array([0.5 + 0j])) == pytest.approx(0.7)

    def test_atom_outside_box(self):
        mu = M.AtomicMeasure([[0.1 + 0j]], [0.7])
        assert M.box_mass(mu, np.array([0.0 + 0.9j])) == 0.0

    def test_ball_mass_center_atom(self):
        mu = M.AtomicMeasure([[0.5 + 0.1j]], [2.5])
        assert M.ball_mass(mu, np.array([0.5 + 0.1j]), 0.1) == pytest.approx(2.5)

    def test_radial_box_mass_against_qmc(self, w_const2, rng):
        mu = M.radial_density_from_weight(w_const2)
        a = np.array([0.6 + 0j, 0.1j])
        exact = M.box_mass(mu, a)
        pts = random_ball_points(rng, 2, 2**18, rmax=1.0)
        mc = float(np.mean(G.in_carleson_box(pts, a) * w_const2.rho(np.linalg.norm(pts, axis=1))))
        assert exact == pytest.approx(mc, rel=0.02)

    def test_radial_ball_mass_n2_against_qmc(self, w_const2):
        mu = M.radial_density_from_weight(w_const2, s=1.0)
        z = np.array([0.7 + 0j, 0.0j])
        exact = M.ball_mass(mu, z, 0.35)
        pts, vol = S.ellipsoid_points(z, 0.35, 17, seed=11)
        mags = np.linalg.norm(pts, axis=1)
        mc = vol * float(np.mean((1 - mags) * w_const2.rho(mags)))
        assert exact == pytest.approx(mc, rel=5e-3)


class TestMuHat:
    def test_zero_measure(self, grid_const1):
        mu = M.AtomicMeasure(np.zeros((0, 1), complex), np.zeros(0))
        assert M.mu_hat(mu, grid_const1, np.array([0.5 + 0j]), 0.2) == 0.0

    def test_atom_formula(self, grid_const1):
        mu = M.AtomicMeasure([[0.6 + 0j]], [2.0])
        z = np.array([0.6 + 0j])
        k = G.annulus_index(grid_const1, z)
        expect = 2.0 * 2.0**k / (1 - 0.6) ** 1
        assert M.mu_hat(mu, grid_const1, z, 0.2) == pytest.approx(expect)

    def test_monotone_in_alpha(self, grid_const1, rng):
        pts = random_ball_points(rng, 1, 15, rmax=0.9)
        mu = M.AtomicMeasure(pts, np.ones(15))
        z = np.array([0.55 + 0j])
        v1 = M.mu_hat(mu, grid_const1, z, 0.1)
        v2 = M.mu_hat(mu, grid_const1, z, 0.4)
        assert v1 <= v2 + 1e-15


class TestLambdaDensity:
    def test_value_at_r0(self, w_const1, grid_const1):
        assert M.lambda_density(w_const1, grid_const1, np.array([0.5 + 0j])) == pytest.approx(4.0)

    def test_positive(self, w_pow1, grid_pow1, rng):
        pts = random_ball_points(rng, 1, 50, rmax=grid_pow1.radii[-1] * 0.999)
        for z in pts:
            assert M.lambda_density(w_pow1, grid_pow1, z) > 0

    def test_jump_factor_bounded(self, w_const1, grid_const1):
        # crossing r_k multiplies 2^k by 2 and (1-|z|)^-n continuously
        below = M.lambda_density(w_const1, grid_const1, np.array([0.7499999 + 0j]))
        above = M.lambda_density(w_const1, grid_const1, np.array([0.7500001 + 0j]))
        assert above / below == pytest.approx(2.0, rel=1e-4)


class TestRemarkMeasure:
    def test_single_ball_mass(self):
        mu = M.remark_measure([[0.5 + 0j]], [1.0], eps=0.1)
        # v(B(z, s)) = s^(2n) in normalized volume
        assert M.total_mass(mu) == pytest.approx(0.05**2, rel=1e-12)

    def test_overlap_rejected(self):
        with pytest.raises(ValueError, match="overlap"):
            M.remark_measure([[0.5 + 0j], [0.5005 + 0j]], [1.0, 1.0], eps=0.1)

    def test_volume_ratio_exponent(self):
        # (v(B)/v(E))^(p-1) scales like (1-|z|)^((n-1)(p-1)): exponent 0 in
        # dimension one, positive in higher dimension
        eps, p = 0.1, 2.0
        for n, expect in ((1, 0.0), (2, 1.0)):
            logs = []
            for j in (3, 4, 5, 6):
                delta = 4.0**-j
                z = np.zeros(n, complex)
                z[0] = 1 - delta
                vB = (eps * delta) ** (2 * n)
                vE = G.bergman_ball_volume(z, eps)
                logs.append(((p - 1) * math.log(vB / vE), math.log(delta)))
            slope = np.polyfit([b for _, b in logs], [a for a, _ in logs], 1)[0]
            assert slope == pytest.approx(expect, abs=0.05)


class TestQmcDiagnostics:
    def test_stderr_shrinks_with_samples(self):
        mu = M.BallSumMeasure([[0.3 + 0j]], [1.0], 0.3)

        def f(pts):
            return np.abs(pts[:, 0]) ** 2

        _, e_small = M._ballsum_integral(mu, f, seed=5, m=9)
        _, e_big = M._ballsum_integral(mu, f, seed=5, m=13)
        assert e_big < e_small / 1.3
        assert e_big > 0

    def test_pair_integral_precision_error(self, basis1):
        # absurd tolerance triggers the sample-size hint
        mu = M.BallSumMeasure([[0.5 + 0j]], [1.0], 0.2)
        f = H.HoloFunction.monomial(basis1, [3])
        with pytest.raises(Exception, match="samples"):
            M.pair_integral(f, f, mu, rtol=1e-14)


class TestJsonSchema:
    def test_atomic_round_trip(self):
        mu = M.measure_from_json(
            {"type": "atomic", "points": [[0.5, 0.0, 0.1, -0.2]], "masses": [2.0]}
        )
        assert mu.n == 2
        assert mu.points[0][1] == pytest.approx(0.1 - 0.2j)

    def test_radial_needs_weight(self):
        with pytest.raises(ValueError):
            M.measure_from_json({"type": "radial", "s": 1.0})

    def test_ball_sum(self):
        mu = M.measure_from_json(
            {"type": "ball_sum", "centers": [[0.5, 0.0]], "coefficients": [1.0],
             "epsilon": 0.2}
        )
        assert isinstance(mu, M.BallSumMeasure)

    def test_unknown_type(self):
        with pytest.raises(ValueError):
            M.measure_from_json({"type": "mystery"})
