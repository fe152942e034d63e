"""Geometry of the unit ball: Mobius maps, Bergman metric, boxes, annuli.

Points are numpy arrays of n complex coordinates with |z| < 1.  The
inner product convention is <z, w> = sum_j z_j conj(w_j).  All
predicates use strict inequalities so that boundary sets of measure
zero are resolved deterministically.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import GridRangeError

__all__ = [
    "ball_point",
    "inner",
    "mobius",
    "bergman_dist",
    "bergman_ball_radius0",
    "in_bergman_ball",
    "delta",
    "CarlesonBox",
    "in_carleson_box",
    "annulus_index",
    "bergman_ball_params",
    "bergman_ball_volume",
    "unitary_frame",
]


def ball_point(coords):
    """Validate and return a point of the open unit ball as a complex array."""
    z = np.atleast_1d(np.asarray(coords, dtype=complex))
    if z.ndim != 1:
        raise ValueError("a ball point is a flat tuple of complex coordinates")
    if not np.all(np.isfinite(z.view(float))):
        raise ValueError("ball point has non-finite coordinates")
    if np.linalg.norm(z) >= 1.0:
        raise ValueError(f"|z| = {np.linalg.norm(z):.6g} >= 1: not in the open ball")
    return z


def inner(z, w):
    """Hermitian inner product sum_j z_j conj(w_j), broadcasting over rows."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.sum(z * np.conj(w), axis=-1)


def _norm_sq(z):
    z = np.asarray(z, dtype=complex)
    return np.sum((z * np.conj(z)).real, axis=-1)


def mobius(a, z):
    """The involutive automorphism of the ball interchanging 0 and a.

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>) with P_a the
    projection onto the span of a, Q_a = I - P_a and s_a = sqrt(1-|a|^2).
    Satisfies phi_a(0) = a, phi_a(a) = 0 and phi_a(phi_a(z)) = z.
    """
    a = ball_point(a)
    z = np.asarray(z, dtype=complex)
    aa = _norm_sq(a)
    if aa == 0.0:
        return -z
    za = inner(z, a)
    P = (za / aa)[..., None] * a
    Q = z - P
    s = math.sqrt(1.0 - aa)
    return (a - P - s * Q) / (1.0 - za)[..., None]


def _phi_abs_sq(z, w):
    """|phi_z(w)|^2 via 1 - |phi_z(w)|^2 = (1-|z|^2)(1-|w|^2)/|1-<z,w>|^2."""
    A = (1.0 - _norm_sq(z)) * (1.0 - _norm_sq(w)) / np.abs(1.0 - inner(z, w)) ** 2
    return np.clip(1.0 - A, 0.0, None)


def bergman_dist(z, w):
    """beta(z, w) = (1/2) log((1+|phi_z(w)|)/(1-|phi_z(w)|)) = artanh |phi_z(w)|."""
    m = np.sqrt(_phi_abs_sq(z, w))
    return np.arctanh(m)


def bergman_ball_radius0(alpha):
    """Euclidean radius of the Bergman metric ball around 0: tanh(alpha)."""
    if alpha <= 0:
        raise ValueError("Bergman ball radius alpha must be positive")
    return math.tanh(alpha)


def in_bergman_ball(w, z, alpha):
    """True when beta(z, w) < alpha (vectorized over rows of w)."""
    if alpha <= 0:
        raise ValueError("Bergman ball radius alpha must be positive")
    # beta < alpha  <=>  1 - |phi|^2 > sech^2(alpha)
    A = (1.0 - _norm_sq(z)) * (1.0 - _norm_sq(w)) / np.abs(1.0 - inner(z, w)) ** 2
    return A > 1.0 / math.cosh(alpha) ** 2


def delta(a):
    """Default box radius sqrt(2 (1 - |a|))."""
    return math.sqrt(2.0 * (1.0 - float(np.linalg.norm(np.asarray(a, dtype=complex)))))


@dataclass
class CarlesonBox:
    """Non-isotropic box near the boundary in the direction of a != 0.

    Membership is sqrt(|1 - <a/|a|, z>|) < r, with r defaulting to
    delta(a) = sqrt(2 (1 - |a|)).
    """

    center: np.ndarray
    radius: float = None

    def __post_init__(self):
        self.center = np.atleast_1d(np.asarray(self.center, dtype=complex))
        norm = float(np.linalg.norm(self.center))
        if norm == 0.0:
            raise ValueError("Carleson box undefined for a = 0")
        if norm >= 1.0:
            raise ValueError("box center must lie in the open ball")
        if self.radius is None:
            self.radius = delta(self.center)
        if self.radius <= 0:
            raise ValueError("box radius must be positive")
        self.direction = self.center / norm

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        return np.abs(1.0 - inner(z, self.direction)) < self.radius**2


def in_carleson_box(z, a, radius=None):
    """True when z lies in the box Q(a, r); r defaults to delta(a)."""
    return CarlesonBox(a, radius).contains(z)


def annulus_index(grid, z):
    """Index k with r_k <= |z| < r_{k+1}; the central ball maps to k = 0.

    The annuli only cover {|z| >= r_0}; merging the compact central
    ball into the first annulus keeps every downstream formula total
    without affecting two-sided comparability bands.
    """
    z = np.asarray(z)
    if z.dtype == complex and z.ndim >= 1:
        mag = np.sqrt(_norm_sq(z))
    else:
        mag = np.abs(np.asarray(z, dtype=float))
    scalar = np.isscalar(mag) or mag.ndim == 0
    mag = np.atleast_1d(mag)
    if np.any(mag >= grid.radii[-1]):
        worst = float(np.max(mag))
        raise GridRangeError(
            f"|z| = {worst:.12g} >= r_{len(grid.radii)-1} = {grid.radii[-1]:.12g}; "
            "recompute the grid with a larger kmax"
        )
    k = np.searchsorted(grid.radii, mag, side="right") - 1
    k = np.clip(k, 0, None)
    return int(k[0]) if scalar else k


def unitary_frame(z):
    """Unitary matrix whose first column is z/|z| (complex Householder)."""
    z = np.asarray(z, dtype=complex)
    n = z.shape[0]
    u = z / np.linalg.norm(z)
    U = np.zeros((n, n), dtype=complex)
    U[:, 0] = u
    # complete with Gram-Schmidt over the standard basis
    col = 1
    for j in range(n):
        if col >= n:
            break
        e = np.zeros(n, dtype=complex)
        e[j] = 1.0
        v = e - U[:, :col] @ (np.conj(U[:, :col].T) @ e)
        nv = np.linalg.norm(v)
        if nv > 1e-10:
            U[:, col] = v / nv
            col += 1
    if col != n:
        raise RuntimeError("failed to complete unitary frame")
    return U


def bergman_ball_params(z, alpha):
    """Euclidean description of E(z, alpha) as an ellipsoid.

    Returns (center_vector, s_radial, s_transverse, frame) where the
    ellipsoid is  |<w - c, u>|^2 / s_radial^2 + |Q(w - c)|^2 / s_transverse^2 < 1
    with u = z/|z| the radial direction (frame's first column).  For
    z = 0 the ball is the round ball of radius tanh(alpha).
    """
    z = ball_point(z)
    n = z.shape[0]
    R = math.tanh(alpha)
    z2 = float(_norm_sq(z))
    if z2 == 0.0:
        return np.zeros(n, complex), R, R, np.eye(n, dtype=complex)
    t = (1.0 - z2) / (1.0 - R * R * z2)
    center = (1.0 - R * R) / (1.0 - R * R * z2) * z
    s_radial = R * t
    s_transverse = R * math.sqrt(t)
    return center, s_radial, s_transverse, unitary_frame(z)


def bergman_ball_volume(z, alpha):
    """Normalized volume v(E(z, alpha)); comparable to (1-|z|)^(n+1)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.shape[0]
    _, s1, s2, _ = bergman_ball_params(z, alpha)
    return s1**2 * s2 ** (2 * (n - 1))
