import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bergman import geometry as G
from bergman import sampling as S
from bergman.errors import GridRangeError

from conftest import random_ball_points


def _pt(*coords):
    return np.array(coords, dtype=complex)


class TestMobius:
    def test_interchanges_zero_and_a(self):
        a = _pt(0.3 + 0.4j, -0.2j)
        assert np.allclose(G.mobius(a, np.zeros(2, complex)), a, atol=1e-14)
        assert np.linalg.norm(G.mobius(a, a)) < 1e-14

    def test_disc_value(self):
        # (a - z)/(1 - conj(a) z) at a = 0.5, z = 0.25 is 2/7
        out = G.mobius(_pt(0.5), _pt(0.25))
        assert out[0] == pytest.approx(2.0 / 7.0, abs=1e-14)

    @settings(max_examples=40, deadline=None)
    @given(data=st.data())
    def test_involution(self, data):
        n = data.draw(st.sampled_from([1, 2, 3]))
        raw = data.draw(
            st.lists(
                st.floats(min_value=-1, max_value=1, allow_nan=False),
                min_size=4 * n,
                max_size=4 * n,
            )
        )
        v = np.array(raw[: 2 * n]) + 1j * np.array(raw[2 * n :])
        a = v[:n] * 0.9 / max(1.0, np.linalg.norm(v[:n]) / 0.9)
        z = v[n:] * 0.9 / max(1.0, np.linalg.norm(v[n:]) / 0.9)
        assert np.max(np.abs(G.mobius(a, G.mobius(a, z)) - z)) < 1e-12


class TestBergmanMetric:
    def test_zero_distance(self):
        z = _pt(0.3, 0.2j)
        assert G.bergman_dist(z, z) == pytest.approx(0.0, abs=1e-7)

    def test_distance_from_origin(self):
        w = _pt(0.5)
        assert G.bergman_dist(np.zeros(1, complex), w) == pytest.approx(
            0.5 * math.log(3.0), rel=1e-12
        )

    def test_symmetry(self, rng):
        for _ in range(20):
            z, w = random_ball_points(rng, 2, 2)
            assert G.bergman_dist(z, w) == pytest.approx(G.bergman_dist(w, z), rel=1e-10)

    def test_ball_membership_origin(self):
        assert G.bergman_ball_radius0(0.5) == pytest.approx(math.tanh(0.5))
        # tanh(0.5) = 0.4621... < 0.47, so the point is outside
        assert not G.in_bergman_ball(_pt(0.47), np.zeros(1, complex), 0.5)
        assert G.in_bergman_ball(_pt(0.46), np.zeros(1, complex), 0.5)

    def test_center_is_member(self):
        z = _pt(0.4 + 0.1j)
        assert G.in_bergman_ball(z, z, 0.05)


class TestCarlesonBox:
    def test_center_in_own_box(self, rng):
        for _ in range(10):
            a = random_ball_points(rng, 2, 1)[0]
            assert G.in_carleson_box(a, a)

    def test_origin_outside_box_example(self):
        a = _pt(0.5, 0.0)
        assert not G.in_carleson_box(np.zeros(2, complex), a)

    def test_nesting(self, rng):
        a = _pt(0.6 + 0.1j)
        d = G.delta(a)
        pts = random_ball_points(rng, 1, 200)
        inner = G.in_carleson_box(pts, a, d)
        outer = G.in_carleson_box(pts, a, 1.5 * d)
        assert np.all(outer[inner])

    def test_zero_center_rejected(self):
        with pytest.raises(ValueError):
            G.in_carleson_box(_pt(0.1), np.zeros(1, complex))

    def test_default_radius(self):
        box = G.CarlesonBox(_pt(0.5))
        assert box.radius == pytest.approx(math.sqrt(2 * 0.5))


class TestAnnulusIndex:
    def test_examples(self, grid_const1):
        assert G.annulus_index(grid_const1, 0.8) == 1  # 0.75 <= 0.8 < 0.875
        assert G.annulus_index(grid_const1, 0.2) == 0  # central ball merges
        assert G.annulus_index(grid_const1, grid_const1.radii[2]) == 2  # half-open

    def test_range_error(self, grid_const1):
        with pytest.raises(GridRangeError):
            G.annulus_index(grid_const1, 1 - 1e-9)

    def test_vectorized_points(self, grid_const1):
        pts = np.array([[0.8 + 0j], [0.1 + 0.1j]])
        assert list(G.annulus_index(grid_const1, pts)) == [1, 0]


class TestBergmanBallGeometry:
    def test_ellipsoid_matches_membership(self, rng):
        for n in (1, 2, 3):
            for _ in range(20):
                z = random_ball_points(rng, n, 1, rmax=0.99)[0]
                alpha = float(rng.uniform(0.05, 0.8))
                pts, _ = S.ellipsoid_points(z, alpha, 6, seed=int(rng.integers(1e6)))
                # every sampled point of the ellipsoid is metric-inside
                assert np.all(G.in_bergman_ball(pts, z, alpha))

    def test_volume_against_monte_carlo(self, rng):
        z = _pt(0.7, 0.1j)
        alpha = 0.4
        exact = G.bergman_ball_volume(z, alpha)
        pts = random_ball_points(rng, 2, 2**17, rmax=1.0)
        mc = float(np.mean(G.in_bergman_ball(pts, z, alpha)))
        assert mc == pytest.approx(exact, rel=0.05)

    def test_volume_band_near_boundary(self):
        # v(E(z, alpha)) / (1-|z|)^(n+1) stays in a two-sided band
        alpha = 0.3
        vals = []
        for r in (0.9, 0.99, 0.999, 0.9999):
            z = _pt(r, 0.0)
            vals.append(G.bergman_ball_volume(z, alpha) / (1 - r) ** 3)
        assert max(vals) / min(vals) < 3.0
