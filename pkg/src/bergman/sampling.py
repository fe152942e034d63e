"""Seeded quasi-Monte-Carlo point sets on balls, spheres and ellipsoids.

All generators are deterministic functions of their seed (scrambled
Sobol through scipy), so reruns with the same configuration reproduce
identical estimates.  Error estimates use the spread of batch means,
the standard proxy for scrambled-QMC accuracy.
"""

import math

import numpy as np
from scipy import stats
from scipy.stats import qmc

from .geometry import bergman_ball_params

__all__ = [
    "sobol_unit",
    "real_ball_points",
    "complex_ball_points",
    "complex_sphere_points",
    "ellipsoid_points",
    "euclidean_ball_points",
    "annulus_points",
    "batch_mean_stderr",
]


def sobol_unit(dim, m, seed):
    """2^m scrambled Sobol points in [0, 1)^dim."""
    eng = qmc.Sobol(d=dim, scramble=True, seed=int(seed))
    return eng.random_base2(int(m))


def _to_gaussian(u):
    # clip away exact 0/1 before the normal inverse CDF
    eps = np.finfo(float).tiny
    return stats.norm.ppf(np.clip(u, eps, 1.0 - 1e-16))


def real_ball_points(dim, m, seed):
    """2^m points uniform in the unit ball of R^dim (low discrepancy)."""
    u = sobol_unit(dim + 1, m, seed)
    g = _to_gaussian(u[:, :dim])
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = u[:, dim:] ** (1.0 / dim)
    return g / norms * radii


def complex_ball_points(n, m, seed):
    """2^m points uniform w.r.t. normalized volume in the ball of C^n."""
    x = real_ball_points(2 * n, m, seed)
    return x[:, 0::2] + 1j * x[:, 1::2]


def complex_sphere_points(n, m, seed):
    """2^m near-uniform points on the unit sphere of C^n."""
    g = _to_gaussian(sobol_unit(2 * n, m, seed))
    v = g[:, 0::2] + 1j * g[:, 1::2]
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def ellipsoid_points(z, alpha, m, seed):
    """Volume-uniform points of the Bergman ball E(z, alpha).

    Returns (points, volume) with volume in normalized ball units; the
    affine image of uniform ball points stays uniform, so plain means
    over the sample estimate integrals against dv.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.shape[0]
    center, s1, s2, frame = bergman_ball_params(z, alpha)
    xi = complex_ball_points(n, m, seed)
    scale = np.full(n, s2)
    scale[0] = s1
    pts = center + (xi * scale) @ frame.T
    vol = s1**2 * s2 ** (2 * (n - 1))
    return pts, vol


def euclidean_ball_points(center, radius, m, seed):
    """Volume-uniform points of a Euclidean ball in C^n, plus its volume."""
    center = np.atleast_1d(np.asarray(center, dtype=complex))
    n = center.shape[0]
    pts = center + radius * complex_ball_points(n, m, seed)
    return pts, radius ** (2 * n)


def annulus_points(grid, k, n, m, seed):
    """Volume-uniform points of the annulus Omega_k, plus its volume.

    Radii are drawn by inverting the cdf of r^(2n-1) between r_k and
    r_{k+1}; directions come from the sphere sampler.
    """
    r_lo, r_hi = grid.radii[k], grid.radii[k + 1]
    u = sobol_unit(1, m, seed)[:, 0]
    lo, hi = r_lo ** (2 * n), r_hi ** (2 * n)
    radii = (lo + u * (hi - lo)) ** (1.0 / (2 * n))
    dirs = complex_sphere_points(n, m, seed + 1)
    return radii[:, None] * dirs, hi - lo


def batch_mean_stderr(values, batches=8):
    """(mean, stderr) from the spread of batch means over a QMC sample."""
    values = np.asarray(values, dtype=float)
    nb = min(batches, len(values))
    parts = np.array_split(values, nb)
    means = np.array([p.mean() for p in parts])
    mean = float(values.mean())
    if nb < 2:
        return mean, float("inf")
    return mean, float(means.std(ddof=1) / math.sqrt(nb))
