"""Measures on the ball, integration against them, and derived densities.

Three measure models cover the experiments:

* ``AtomicMeasure`` - finitely many point masses; every integral is an
  exact finite sum.
* ``RadialDensityMeasure`` - d mu = w_mu(|z|) dv; integrals reduce to
  radial moments (exact in coefficient space) or to low-dimensional
  section quadratures for boxes and metric balls.
* ``BallSumMeasure`` - d mu = sum_j c_j chi_{B(z_j, eps(1-|z_j|))} dv;
  integrals use seeded quasi-Monte-Carlo over each ball with batch
  error estimates.

Restriction to an annulus is represented by a radial window carried on
the measure (atoms are dropped eagerly).
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .errors import PrecisionError
from .geometry import (
    annulus_index,
    bergman_ball_params,
    in_bergman_ball,
    in_carleson_box,
    inner,
)
from .sampling import batch_mean_stderr, euclidean_ball_points

__all__ = [
    "AtomicMeasure",
    "RadialDensityMeasure",
    "BallSumMeasure",
    "radial_density_from_weight",
    "remark_measure",
    "total_mass",
    "pair_integral",
    "restrict_to_annulus",
    "box_mass",
    "ball_mass",
    "mu_hat",
    "lambda_density",
    "measure_from_json",
]

_BALLSUM_M = 12  # 2^12 QMC points per ball


def _window_mask(window, mags):
    if window is None:
        return np.ones_like(mags, dtype=bool)
    lo, hi = window
    return (mags >= lo) & (mags < hi)


@dataclass
class AtomicMeasure:
    """Finitely many positive point masses inside the open ball."""

    points: np.ndarray
    masses: np.ndarray
    label: str = "atomic"

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=complex))
        self.masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if len(self.points) != len(self.masses):
            raise ValueError("points and masses must have equal length")
        if np.any(self.masses <= 0):
            raise ValueError("atom masses must be positive")
        if np.any(np.linalg.norm(self.points, axis=1) >= 1.0):
            raise ValueError("atoms must lie in the open ball")

    @property
    def n(self):
        return self.points.shape[1]


@dataclass
class RadialDensityMeasure:
    """d mu = profile(|z|) dv with a nonnegative radial profile.

    ``log_moment_closed(d)``, when provided, returns log of the measure
    moments M_d = 2n int r^(2d+2n-1) profile(r) dr in closed form,
    vectorized over integer arrays; otherwise adaptive quadrature on
    the profile is used (and cached).  Closed moments are what make
    compressions and Berezin scans near the boundary affordable.
    """

    n: int
    profile: object  # callable r -> density, vectorized
    log_moment_closed: object = None
    window: tuple = None
    label: str = "radial"
    _cache: dict = field(default_factory=dict, repr=False)

    def moment(self, d):
        d = int(d)
        if d not in self._cache:
            if self.log_moment_closed is not None and self.window is None:
                val = float(np.exp(self.log_moment_closed(np.array([d]))[0]))
            else:
                lo, hi = self.window if self.window else (0.0, 1.0)
                val = 2 * self.n * integrate.quad(
                    lambda r: r ** (2 * d + 2 * self.n - 1) * float(self.profile(r)),
                    lo,
                    min(hi, 1.0),
                    epsabs=1e-13,
                    epsrel=1e-12,
                    limit=300,
                )[0]
            self._cache[d] = val
        return self._cache[d]

    def log_moments(self, dmax):
        """log M_d for d = 0..dmax (vectorized when closed forms exist)."""
        arr = self._cache.get("_log_arr")
        if arr is not None and len(arr) > dmax:
            return arr[: dmax + 1]
        if self.log_moment_closed is not None and self.window is None:
            grow = dmax if arr is None else max(dmax, 2 * len(arr))
            out = self.log_moment_closed(np.arange(grow + 1))
        else:
            out = np.log([self.moment(d) for d in range(dmax + 1)])
        self._cache["_log_arr"] = out
        return out[: dmax + 1]


@dataclass
class BallSumMeasure:
    """d mu = sum_j c_j chi_{B(z_j, eps (1-|z_j|))} dv."""

    centers: np.ndarray
    coeffs: np.ndarray
    eps: float
    window: tuple = None
    label: str = "ball_sum"

    def __post_init__(self):
        self.centers = np.atleast_2d(np.asarray(self.centers, dtype=complex))
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))
        if len(self.centers) != len(self.coeffs):
            raise ValueError("centers and coefficients must have equal length")
        if np.any(self.coeffs <= 0):
            raise ValueError("ball coefficients must be positive")
        if self.eps <= 0 or self.eps >= 1:
            raise ValueError("relative radius eps must lie in (0, 1)")

    @property
    def n(self):
        return self.centers.shape[1]

    def radii(self):
        return self.eps * (1.0 - np.linalg.norm(self.centers, axis=1))


def radial_density_from_weight(w, s=0.0):
    """The density (1 - r)^s rho(r); s = 0 gives d mu = rho dv.

    Closed-form log-moments are attached for the constant and power
    families (Beta integrals), so deep compressions and boundary
    Berezin scans stay cheap and exact.
    """
    from scipy import special

    n, c = w.n, w.c
    logc = math.log(2 * n * c)

    def profile(r):
        return (1.0 - np.asarray(r, dtype=float)) ** s * w.rho(r)

    closed = None
    if w.family == "constant":
        def closed(d):
            return logc + special.betaln(2 * np.asarray(d) + 2 * n, s + 1.0)
    elif w.family == "power":
        b = w.params["beta"]
        if s - b > -1.0:
            def closed(d):
                return logc + special.betaln(2 * np.asarray(d) + 2 * n, s - b + 1.0)

    label = w.family if s == 0.0 else f"(1-r)^{s}*{w.family}"
    return RadialDensityMeasure(n=n, profile=profile, log_moment_closed=closed, label=label)


def remark_measure(centers, coefficients, eps=0.1):
    """Sum of indicator balls B(z_j, eps (1-|z_j|)), validated disjoint."""
    mu = BallSumMeasure(np.asarray(centers), np.asarray(coefficients), eps)
    c = mu.centers
    rad = mu.radii()
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            if np.linalg.norm(c[i] - c[j]) <= rad[i] + rad[j]:
                raise ValueError(
                    f"balls {i} and {j} overlap; spread the centers or shrink eps"
                )
    mags = np.linalg.norm(c, axis=1)
    if np.any(np.diff(mags) <= 0) and len(mags) > 1:
        raise ValueError("ball centers must have strictly increasing modulus")
    return mu


# -- generic operations ------------------------------------------------


def total_mass(mu, seed=0):
    if isinstance(mu, AtomicMeasure):
        return float(np.sum(mu.masses))
    if isinstance(mu, RadialDensityMeasure):
        return mu.moment(0)
    if isinstance(mu, BallSumMeasure):
        if mu.window is None:
            return float(np.sum(mu.coeffs * mu.radii() ** (2 * mu.n)))
        val, _ = _ballsum_integral(mu, lambda pts: np.ones(len(pts)), seed)
        return val
    raise TypeError(f"unknown measure type {type(mu)!r}")


def _ballsum_integral(mu, f, seed, m=_BALLSUM_M):
    """sum_j c_j int_{B_j} f dv by per-ball QMC; returns (value, stderr)."""
    total, var = 0.0, 0.0
    for j, (center, c) in enumerate(zip(mu.centers, mu.coeffs)):
        r = mu.eps * (1.0 - float(np.linalg.norm(center)))
        pts, vol = euclidean_ball_points(center, r, m, seed + 17 * j)
        vals = np.asarray(f(pts), dtype=float)
        if mu.window is not None:
            vals = vals * _window_mask(mu.window, np.linalg.norm(pts, axis=1))
        mean, err = batch_mean_stderr(vals)
        total += c * vol * mean
        var += (c * vol * err) ** 2
    return total, math.sqrt(var)


def pair_integral(f, g, mu, seed=0, rtol=1e-3):
    """int f conj(g) d mu - the quadratic form of the measure's Toeplitz map.

    Exact for atoms (finite sum) and for radial densities (coefficient
    space); quasi-Monte-Carlo over each ball for ball sums, raising
    PrecisionError when the batch error exceeds rtol * scale.
    """
    if f.basis is not g.basis and (f.basis.n != g.basis.n or f.basis.degree != g.basis.degree):
        raise ValueError("pair_integral needs both functions on the same basis")
    if isinstance(mu, AtomicMeasure):
        if mu.n != f.basis.n:
            raise ValueError("measure and basis dimensions differ")
        fv = f(mu.points)
        gv = g(mu.points)
        return complex(np.sum(mu.masses * np.atleast_1d(fv) * np.conj(np.atleast_1d(gv))))
    if isinstance(mu, RadialDensityMeasure):
        if mu.n != f.basis.n:
            raise ValueError("measure and basis dimensions differ")
        basis = f.basis
        Ms = np.array([mu.moment(d) for d in range(basis.degree + 1)])
        vals = f.coeffs * np.conj(g.coeffs) * basis.sigma * Ms[basis.degrees]
        return complex(np.sum(vals))
    if isinstance(mu, BallSumMeasure):
        def integrand(pts):
            return (np.atleast_1d(f(pts)) * np.conj(np.atleast_1d(g(pts)))).real

        def integrand_im(pts):
            return (np.atleast_1d(f(pts)) * np.conj(np.atleast_1d(g(pts)))).imag

        re, err_re = _ballsum_integral(mu, integrand, seed)
        im, err_im = _ballsum_integral(mu, integrand_im, seed)
        err = math.hypot(err_re, err_im)
        scale = max(abs(re), abs(im), total_mass(mu))
        if err > rtol * scale:
            need = int(2 ** (_BALLSUM_M + 2 * math.ceil(math.log2(err / (rtol * scale) + 1))))
            raise PrecisionError(
                f"ball-sum pairing error {err:.2e} above {rtol:.1e} * {scale:.2e}; "
                f"try roughly {need} samples per ball"
            )
        return complex(re, im)
    raise TypeError(f"unknown measure type {type(mu)!r}")


def restrict_to_annulus(mu, grid, k):
    """chi_{Omega_k} mu: atoms dropped, densities masked by a radial window."""
    if not 0 <= k <= grid.kmax:
        raise ValueError(f"annulus index {k} outside 0..{grid.kmax}")
    r_lo, r_hi = grid.radii[k], grid.radii[k + 1]
    if isinstance(mu, AtomicMeasure):
        mags = np.linalg.norm(mu.points, axis=1)
        keep = (mags >= r_lo) & (mags < r_hi)
        if k == 0:
            keep |= mags < r_lo  # central ball merges into the first annulus
        return AtomicMeasure(mu.points[keep], mu.masses[keep], mu.label)
    lo = 0.0 if k == 0 else r_lo
    if isinstance(mu, RadialDensityMeasure):
        return replace(mu, window=(lo, r_hi), _cache={})
    if isinstance(mu, BallSumMeasure):
        return replace(mu, window=(lo, r_hi))
    raise TypeError(f"unknown measure type {type(mu)!r}")


def box_mass(mu, a, radius=None, seed=0):
    """mu(Q(a, r)), r defaulting to delta(a).

    Atoms are summed exactly; radial densities use the exact angular
    section of the box on each sphere (a one-dimensional quadrature,
    accurate on every annulus); ball sums use per-ball QMC.
    """
    if isinstance(mu, AtomicMeasure):
        if len(mu.points) == 0:
            return 0.0
        hit = in_carleson_box(mu.points, a, radius)
        return float(np.sum(mu.masses[hit]))
    if isinstance(mu, RadialDensityMeasure):
        return _radial_box_mass(mu, a, radius)
    if isinstance(mu, BallSumMeasure):
        val, _ = _ballsum_integral(
            mu, lambda pts: in_carleson_box(pts, a, radius).astype(float), seed
        )
        return val
    raise TypeError(f"unknown measure type {type(mu)!r}")


def _box_angular_fraction(n, r, amag, radius):
    """sigma{xi : |1 - r <u, xi>| < radius^2} for any unit direction u."""
    s2 = radius * radius if radius is not None else 2.0 * (1.0 - amag)
    if n == 1:
        # arc of the circle |1 - r e^{i t}| < s2
        num = 1.0 + r * r - s2 * s2
        cosb = num / (2.0 * r) if r > 0 else (1.0 if num > 0 else -1.0)
        if cosb <= -1.0:
            return 1.0
        if cosb >= 1.0:
            return 0.0
        return math.acos(cosb) / math.pi
    # w = <u, xi> has density (n-1)/pi (1-|w|^2)^(n-2) on the unit disc;
    # the section is the lens {|1 - r w| < s2} cap {|w| < 1}
    if r <= 0:
        return 1.0 if s2 > 1.0 else 0.0
    cx, cr = 1.0 / r, s2 / r
    x_lo, x_hi = max(-1.0, cx - cr), min(1.0, cx + cr)
    if x_hi <= x_lo:
        return 0.0
    xs, ws = np.polynomial.legendre.leggauss(96)
    x = 0.5 * (x_hi - x_lo) * xs + 0.5 * (x_hi + x_lo)
    y_disc = np.sqrt(np.clip(1.0 - x * x, 0.0, None))
    y_lens = np.sqrt(np.clip(cr * cr - (x - cx) ** 2, 0.0, None))
    Y = np.minimum(y_disc, y_lens)
    if n == 2:
        integrand = 2.0 * Y
    elif n == 3:
        integrand = 2.0 * (Y * (1.0 - x * x) - Y**3 / 3.0)
    else:
        # inner Gauss rule in y for (1 - x^2 - y^2)^(n-2)
        ys, wy = np.polynomial.legendre.leggauss(64)
        integrand = np.empty_like(Y)
        for i, (xi, Yi) in enumerate(zip(x, Y)):
            yy = Yi * ys
            integrand[i] = Yi * np.sum(wy * np.clip(1 - xi * xi - yy * yy, 0, None) ** (n - 2))
    val = (n - 1) / math.pi * 0.5 * (x_hi - x_lo) * float(np.sum(ws * integrand))
    return min(val, 1.0)


def _radial_box_mass(mu, a, radius):
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    amag = float(np.linalg.norm(a))
    if amag == 0.0:
        raise ValueError("Carleson box undefined for a = 0")
    n = mu.n
    lo, hi = mu.window if mu.window else (0.0, 1.0)
    hi = min(hi, 1.0)
    if hi <= lo:
        return 0.0

    def integrand(r):
        r = np.atleast_1d(r)
        frac = np.array([_box_angular_fraction(n, ri, amag, radius) for ri in r])
        return 2 * n * r ** (2 * n - 1) * np.asarray(mu.profile(r), dtype=float) * frac

    val = integrate.quad(lambda r: float(integrand(r)[0]), lo, hi,
                         epsabs=1e-12, epsrel=1e-10, limit=300)[0]
    return max(val, 0.0)


def ball_mass(mu, z, alpha, seed=0):
    """mu(E(z, alpha)) for the Bergman metric ball around z.

    Atoms are exact; radial densities integrate the exact circular
    section of the ellipsoid E(z, alpha) (dimension 1-2 quadrature);
    ball sums use per-ball QMC with the metric-ball indicator.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if isinstance(mu, AtomicMeasure):
        if len(mu.points) == 0:
            return 0.0
        hit = in_bergman_ball(mu.points, z, alpha)
        return float(np.sum(mu.masses[hit]))
    if isinstance(mu, RadialDensityMeasure):
        return _radial_ball_mass(mu, z, alpha)
    if isinstance(mu, BallSumMeasure):
        val, _ = _ballsum_integral(
            mu, lambda pts: in_bergman_ball(pts, z, alpha).astype(float), seed
        )
        return val
    raise TypeError(f"unknown measure type {type(mu)!r}")


def _radial_ball_mass(mu, z, alpha):
    n = mu.n
    center, s1, s2, _ = bergman_ball_params(z, alpha)
    cmag = float(np.linalg.norm(center))
    lo, hi = mu.window if mu.window else (0.0, 1.0)
    lo = max(lo, cmag - s1)
    hi = min(hi, cmag + s1, 1.0)
    if hi <= lo:
        return 0.0
    if n == 1:
        # parametrize t = c + s1 sin(theta): the arc-fraction kinks at the
        # disc edges become smooth, so a fixed Gauss rule is exact-grade
        th_lo = math.asin(max(-1.0, min(1.0, (lo - cmag) / s1)))
        th_hi = math.asin(max(-1.0, min(1.0, (hi - cmag) / s1)))
        if th_hi <= th_lo:
            return 0.0
        xs, ws = np.polynomial.legendre.leggauss(80)
        th = 0.5 * (th_hi - th_lo) * xs + 0.5 * (th_hi + th_lo)
        t = cmag + s1 * np.sin(th)
        jac = 0.5 * (th_hi - th_lo) * s1 * np.cos(th)
        with np.errstate(invalid="ignore", divide="ignore"):
            cosb = (t * t + cmag * cmag - s1 * s1) / (2.0 * t * cmag)
        frac = np.where(cosb <= -1.0, 1.0,
                        np.where(cosb >= 1.0, 0.0, np.arccos(np.clip(cosb, -1, 1)) / math.pi))
        vals = 2.0 * t * np.asarray(mu.profile(np.clip(t, 0.0, 1 - 1e-15)), dtype=float) * frac
        return max(float(np.sum(ws * jac * vals)), 0.0)
    if n == 2:
        # axial symmetry: w1 = x + i y along z, |w2| = tau transverse;
        # region ((x-c)^2 + y^2)/s1^2 + tau^2/s2^2 < 1, dv = (4/pi) tau dx dy dtau
        xs, wx = np.polynomial.legendre.leggauss(48)
        ys, wy = np.polynomial.legendre.leggauss(24)
        ts, wt = np.polynomial.legendre.leggauss(24)
        x = cmag + s1 * xs
        total = 0.0
        for xi, wxi in zip(x, wx):
            ymax = s1 * math.sqrt(max(0.0, 1.0 - ((xi - cmag) / s1) ** 2))
            if ymax == 0.0:
                continue
            y = ymax * ys
            for yi, wyi in zip(y, wy):
                tmax = s2 * math.sqrt(max(0.0, 1.0 - ((xi - cmag) ** 2 + yi**2) / s1**2))
                if tmax == 0.0:
                    continue
                tau = 0.5 * tmax * (ts + 1.0)
                r = np.sqrt(xi * xi + yi * yi + tau * tau)
                ok = (r >= lo) & (r < hi)
                dens = np.where(ok, mu.profile(np.clip(r, 0, 1 - 1e-15)), 0.0)
                inner_val = 0.5 * tmax * np.sum(wt * tau * dens)
                total += wxi * wyi * ymax * inner_val
        return max(total * s1 * (4.0 / math.pi), 0.0)
    # generic dimension: QMC over the ellipsoid
    from .sampling import ellipsoid_points

    pts, vol = ellipsoid_points(z, alpha, 14, seed=1234)
    mags = np.linalg.norm(pts, axis=1)
    vals = np.asarray(mu.profile(np.clip(mags, 0, 1 - 1e-15)), dtype=float)
    vals = vals * _window_mask(mu.window, mags)
    return float(vol * np.mean(vals))


def mu_hat(mu, grid, z, alpha, seed=0):
    """Ball-averaged density 2^k mu(E(z, alpha)) / (1-|z|)^n at z in annulus k."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    n = z.shape[0]
    mag = float(np.linalg.norm(z))
    k = annulus_index(grid, mag)
    return 2.0**k * ball_mass(mu, z, alpha, seed=seed) / (1.0 - mag) ** n


def lambda_density(w, grid, z):
    """Density of the reference measure: 2^k rho(|z|) / (1-|z|)^n."""
    z = np.asarray(z)
    if z.dtype == complex:
        mag = np.sqrt(np.sum(np.abs(np.atleast_2d(z)) ** 2, axis=-1)) if z.ndim > 1 else float(np.linalg.norm(np.atleast_1d(z)))
    else:
        mag = np.abs(z)
    k = annulus_index(grid, mag)
    return 2.0**k * w.rho(mag) / (1.0 - mag) ** w.n


# -- JSON schema -------------------------------------------------------


def measure_from_json(obj, weight=None):
    """Build a measure from its JSON description.

    Formats::

        {"type": "atomic", "points": [[re, im, ...]], "masses": [...]}
        {"type": "radial", "s": 1.0}            # (1-r)^s rho dv, needs weight
        {"type": "ball_sum", "centers": [[re, im, ...]],
         "coefficients": [...], "epsilon": 0.1}

    Point coordinates are interleaved re/im pairs (2n reals for C^n).
    """
    kind = obj.get("type")
    if kind == "atomic":
        pts = np.asarray(obj["points"], dtype=float)
        if pts.ndim != 2 or pts.shape[1] % 2:
            raise ValueError("atomic points must be rows of 2n interleaved reals")
        z = pts[:, 0::2] + 1j * pts[:, 1::2]
        return AtomicMeasure(z, np.asarray(obj["masses"], dtype=float))
    if kind == "radial":
        if weight is None:
            raise ValueError("radial measures need the weight for their profile")
        return radial_density_from_weight(weight, float(obj.get("s", 0.0)))
    if kind == "ball_sum":
        pts = np.asarray(obj["centers"], dtype=float)
        z = pts[:, 0::2] + 1j * pts[:, 1::2]
        return remark_measure(z, np.asarray(obj["coefficients"], dtype=float),
                              float(obj.get("epsilon", 0.1)))
    raise ValueError(f"unknown measure type {kind!r}")
