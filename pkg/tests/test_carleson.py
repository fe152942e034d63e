import numpy as np
import pytest

from bergman import carleson as C
from bergman import measures as M
from bergman import weights as W

from conftest import random_ball_points


def brute_force_hardy_oracle(mu, grid, k, t_points=100_000):
    """Dense-grid search for sup mu_k(Q_a)(1-|a|)^(-n) over a in Omega_k.

    Evaluates the box-mass objective directly (membership test per atom
    per candidate) on a geometric radius grid along each atom direction,
    augmented with the per-atom critical radii where atoms cross the box
    boundary.  Knows nothing about the implementation's search order.
    """
    mu_k = M.restrict_to_annulus(mu, grid, k)
    if len(mu_k.points) == 0:
        return 0.0
    n = mu_k.n
    u_hi, u_lo = grid.one_minus[k], grid.one_minus[k + 1]
    base = 1.0 - np.exp(np.linspace(np.log(u_hi), np.log(u_lo), t_points))
    mags = np.linalg.norm(mu.points, axis=1)
    best = 0.0
    for z0 in mu.points[mags < grid.radii[k + 1]]:
        direction = z0 / np.linalg.norm(z0)
        # critical radii: each atom leaves Q_{t u} when t passes its threshold
        crit = 1.0 - 0.5 * np.abs(1.0 - np.sum(mu_k.points * np.conj(direction), axis=1))
        crit = crit[(crit > grid.radii[k]) & (crit < grid.radii[k + 1])]
        ts = np.unique(np.concatenate([base, np.nextafter(crit, 0.0)]))
        for t in ts:
            a = t * direction
            mass = float(
                np.sum(
                    mu_k.masses[
                        np.abs(1.0 - np.sum(mu_k.points * np.conj(direction), axis=1))
                        < 2.0 * (1.0 - t)
                    ]
                )
            )
            best = max(best, mass / (1.0 - t) ** n)
    return best


class TestHardyConstant:
    def test_single_atom_lower_bound(self, grid_const1):
        a0 = 0.77
        mu = M.AtomicMeasure([[a0 + 0j]], [0.9])
        k = 1  # 0.75 <= 0.77 < 0.875
        ck = C.hardy_constant(mu, grid_const1, k)
        assert ck >= 0.9 / (1 - a0) - 1e-9

    def test_zero_measure(self, grid_const1):
        mu = M.AtomicMeasure(np.zeros((0, 1), complex), np.zeros(0))
        assert C.hardy_constant(mu, grid_const1, 2) == 0.0

    def test_single_atom_closed_form(self, grid_const1):
        # constant weight: the on-ray cutoff (1+r_k)/2 equals r_{k+1}, so the
        # sup is mass / (1 - r_{k+1})
        k = 4
        mu = M.AtomicMeasure([[grid_const1.radii[k] + 0j]], [1.0])
        ck = C.hardy_constant(mu, grid_const1, k)
        assert ck == pytest.approx(1.0 / grid_const1.one_minus[k + 1], rel=1e-12)

    def test_matches_brute_force_oracle_n1(self, grid_const1, rng):
        for trial in range(4):
            count = int(rng.integers(1, 6))
            k = int(rng.integers(1, 6))
            r_lo, r_hi = grid_const1.radii[k], grid_const1.radii[k + 1]
            mags = rng.uniform(r_lo, r_hi, count)
            angles = rng.uniform(0, 2 * np.pi, count) * (0.02 if trial % 2 else 1.0)
            pts = (mags * np.exp(1j * angles)).reshape(-1, 1)
            mu = M.AtomicMeasure(pts, rng.uniform(0.5, 2.0, count))
            impl = C.hardy_constant(mu, grid_const1, k)
            oracle = brute_force_hardy_oracle(mu, grid_const1, k, t_points=20_000)
            assert impl >= oracle - 1e-9 * oracle
            assert impl == pytest.approx(oracle, rel=1e-6)

    def test_scaling_exact(self, grid_const1, rng):
        pts = random_ball_points(rng, 1, 8, rmax=0.9)
        masses = rng.uniform(0.1, 1.0, 8)
        mu1 = M.AtomicMeasure(pts, masses)
        mu3 = M.AtomicMeasure(pts, 3.0 * masses)
        for k in (1, 3):
            assert C.hardy_constant(mu3, grid_const1, k) == pytest.approx(
                3.0 * C.hardy_constant(mu1, grid_const1, k), rel=1e-14
            )

    def test_monotone_in_mass(self, grid_const1, rng):
        pts = random_ball_points(rng, 1, 6, rmax=0.9)
        mu1 = M.AtomicMeasure(pts, np.ones(6))
        mu2 = M.AtomicMeasure(np.vstack([pts, [[0.8 + 0j]]]), np.ones(7))
        for k in range(4):
            assert C.hardy_constant(mu2, grid_const1, k) >= C.hardy_constant(
                mu1, grid_const1, k
            ) - 1e-12

    def test_explicit_candidates_honored(self, grid_const1):
        mu = M.AtomicMeasure([[0.77 + 0j]], [1.0])
        ck = C.hardy_constant(mu, grid_const1, 1, candidates=[[0.77 + 0j]])
        assert ck >= 1.0 / 0.23 - 1e-9


class TestCarlesonProfile:
    def test_reference_measure_bounded(self, w_const1, grid_const1):
        mu = M.radial_density_from_weight(w_const1)
        rep = C.carleson_profile(mu, grid_const1, w_const1)
        assert rep.carleson and not rep.vanishing
        scaled = rep.scaled()
        assert np.max(scaled) / np.median(scaled) < 3.0

    def test_decaying_atoms_vanishing(self, grid_const1):
        pts = [[grid_const1.radii[k] + 0j] for k in range(13)]
        ms = [4.0**-k * grid_const1.one_minus[k] for k in range(13)]
        mu = M.AtomicMeasure(np.array(pts), ms)
        rep = C.carleson_profile(mu, grid_const1, None)
        assert rep.carleson and rep.vanishing
        assert rep.slope == pytest.approx(-1.0, abs=1e-6)

    def test_growing_atoms_not_carleson(self, grid_const1):
        pts = [[grid_const1.radii[k] + 0j] for k in range(1, 13)]
        ms = [k * 2.0**-k * grid_const1.one_minus[k] for k in range(1, 13)]
        mu = M.AtomicMeasure(np.array(pts), ms)
        rep = C.carleson_profile(mu, grid_const1, None)
        assert not rep.carleson and not rep.vanishing

    def test_report_json_shape(self, grid_const1):
        mu = M.AtomicMeasure([[0.6 + 0j]], [1.0])
        rep = C.carleson_profile(mu, grid_const1, None)
        doc = rep.to_json()
        assert set(doc) >= {"rows", "verdicts", "thresholds", "slope_log2_scaled"}
        assert doc["thresholds"]["slope_margin"] == C.SLOPE_MARGIN
