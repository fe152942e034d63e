"""Schatten norms of compressions and the equivalent integral criteria.

Three quantities are computed for a measure mu and exponent p > 1:

* the Schatten p-norm of the degree-D compression of its Toeplitz form,
* int (Berezin transform)^p d lambda,
* int (ball-averaged density mu-hat_alpha)^p d lambda,

where d lambda = 2^k rho dv / (1-|z|)^n is the reference measure.  The
three are comparable with unspecified constants, so reports expose the
ratios and their stability under joint refinement of the compression
degree D and the annulus cutoff: a compression of degree D resolves
radial scales 1 - r of order 1/D, so the cutoff is matched to the
degree via ``matched_kmax`` and both are refined together.  Divergent
cases surface as growth-with-cutoff, flagged rather than hidden.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import PrecisionError
from .geometry import annulus_index, bergman_dist, in_bergman_ball
from .holo import kernel_series
from .measures import (
    AtomicMeasure,
    BallSumMeasure,
    RadialDensityMeasure,
    ball_mass,
    mu_hat,
)
from .sampling import complex_sphere_points, ellipsoid_points, euclidean_ball_points
from .toeplitz import ToeplitzMatrix, _radial_berezin_abs, berezin, eigenvalues
from .weights import dyadic_radii, s_star_growth, s_star_ratio

__all__ = [
    "schatten_norm",
    "QuadSpec",
    "LpIntegral",
    "lp_lambda_integral",
    "SchattenReport",
    "matched_kmax",
    "theorem3_report",
    "theorem3_sweep",
    "RemarkReport",
    "remark_experiment",
]


def schatten_norm(T, p):
    """(sum_j s_j^p)^(1/p) over the compression's eigenvalues.

    Restricted to 1 < p < inf; the compression is PSD so eigenvalues
    are the singular values, and anything below -1e-10 is rejected.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(
            f"Schatten exponent p = {p} outside the supported range 1 < p < inf"
        )
    if isinstance(T, ToeplitzMatrix):
        eigs = eigenvalues(T, psd_tol=1e-10)
    else:
        eigs = np.asarray(T, dtype=float)
        if eigs.size and float(np.min(eigs)) < -1e-10:
            raise ValueError("negative eigenvalues below -1e-10; not PSD")
    s = np.clip(eigs, 0.0, None)
    return float(np.sum(s**p) ** (1.0 / p))


def _schatten_pow_radial(mu, w, degree, p):
    """sum_d mult_d lambda_d^p for a radial measure, via log moments."""
    d = np.arange(degree + 1)
    log_lam = mu.log_moments(degree) - w.log_moments(degree)
    log_mult = np.array(
        [math.lgamma(w.n + k) - math.lgamma(w.n) - math.lgamma(k + 1) for k in d]
    )
    return float(np.sum(np.exp(log_mult + p * log_lam)))


@dataclass
class QuadSpec:
    """Node budget for lambda-measure integrals."""

    radial_nodes: int = 24
    sphere_m: int = 6  # 2^m sphere points for n >= 2 or angular for n = 1
    seed: int = 0


@dataclass
class LpIntegral:
    """Truncated integral with per-annulus contributions and tail estimate."""

    total: float
    per_annulus: np.ndarray
    tail_estimate: float
    diverging: bool


def lp_lambda_integral(F, w, grid, p, quad=None, radial=False):
    """int F(z)^p d lambda over the annuli 0..kmax of the grid.

    Per annulus, Gauss nodes in log(1 - r) handle the geometric radial
    scale; the sphere average uses an equispaced circle (n = 1, exact
    for trigonometric polynomials below the node count) or a seeded
    low-discrepancy sphere set (n >= 2).  ``radial=True`` announces
    F(z) = F(|z|) and skips the sphere factor; F then receives radii.

    The tail estimate extrapolates the last annulus geometrically; when
    contributions fail to decay the integral is flagged as diverging
    and the tail is infinite.
    """
    quad = quad or QuadSpec()
    n = w.n
    xs, ws = np.polynomial.legendre.leggauss(quad.radial_nodes)
    if not radial:
        if n == 1:
            ang = np.exp(2j * math.pi * np.arange(2**quad.sphere_m) / 2**quad.sphere_m)
            sphere = ang[:, None]
        else:
            sphere = complex_sphere_points(n, quad.sphere_m, quad.seed)
    contributions = []
    for k in range(grid.kmax + 1):
        u_hi, u_lo = grid.one_minus[k], grid.one_minus[k + 1]
        s_lo, s_hi = math.log(u_lo), math.log(u_hi)
        s = 0.5 * (s_hi - s_lo) * xs + 0.5 * (s_hi + s_lo)
        u = np.exp(s)
        r = 1.0 - u
        jac = 0.5 * (s_hi - s_lo) * u  # dr = u ds
        dens = 2.0**k * w.rho_u(u) / u**n * 2 * n * r ** (2 * n - 1)
        if radial:
            fvals = np.asarray(F(r), dtype=float) ** p
        else:
            pts = r[:, None, None] * sphere[None, :, :]
            raw = np.asarray(F(pts.reshape(-1, n)), dtype=float).reshape(len(r), -1)
            fvals = np.mean(raw**p, axis=1)
        contributions.append(float(np.sum(ws * jac * dens * fvals)))
    contributions = np.array(contributions)
    total = float(np.sum(contributions))
    tail, diverging = _tail_estimate(contributions)
    return LpIntegral(total, contributions, tail, diverging)


def _tail_estimate(contributions):
    c = contributions[contributions > 0]
    if len(c) < 3:
        return 0.0, False
    q = c[-1] / c[-2]
    if q < 0.95:
        return float(c[-1] * q / (1.0 - q)), False
    return math.inf, bool(np.all(np.diff(c[-3:]) >= -1e-12 * c[-1]))


def matched_kmax(w, degree, cap=64):
    """Deepest annulus resolved by a degree-``degree`` compression.

    Monomials of degree d concentrate at radial scale 1 - r ~ 1/d, so
    annuli with 1 - r_k below 1/degree belong to coefficients the
    compression does not carry.  Refining the degree and this cutoff
    together is what makes comparability ratios stable even for
    divergent (non-Schatten) instances.
    """
    k = 0
    while k < cap:
        grid = dyadic_radii(w, k + 1)
        if grid.one_minus[k + 1] < 1.0 / degree:
            break
        k += 1
    return max(k, 1)


@dataclass
class SchattenReport:
    """The three comparable quantities and their ratios, with metadata."""

    p: float
    alpha: float
    degree: int
    kmax: int
    schatten_norm_p: float
    schatten_p_pow: float
    integral_berezin: float
    integral_muhat: float
    r1: float  # schatten^p / integral_muhat
    r2: float  # schatten^p / integral_berezin
    muhat_tail: float
    berezin_tail: float
    diverging: bool
    alpha_sensitivity: dict | None = None

    def to_json(self):
        out = {
            "p": self.p,
            "alpha": self.alpha,
            "degree": self.degree,
            "kmax": self.kmax,
            "schatten_norm_p": self.schatten_norm_p,
            "schatten_p_pow": self.schatten_p_pow,
            "integral_berezin": self.integral_berezin,
            "integral_muhat": self.integral_muhat,
            "r1_schatten_over_muhat": self.r1,
            "r2_schatten_over_berezin": self.r2,
            "tails": {"muhat": self.muhat_tail, "berezin": self.berezin_tail},
            "diverging": self.diverging,
        }
        if self.alpha_sensitivity:
            out["alpha_sensitivity"] = self.alpha_sensitivity
        return out


def theorem3_report(mu, w, p, degree, alpha=0.2, kmax=None, quad=None,
                    sensitivity=None, kernel_degree=400, seed=0):
    """Compare the Schatten power with the two integral criteria.

    The comparison is meaningful as a two-sided band across families of
    measures, never as per-instance equality; ``kmax`` defaults to the
    cutoff matched to ``degree``.  A warning is emitted when the weight
    fails the empirical tail-domination check (bounded rho*/rho), since
    the equivalence is only expected under it.
    """
    if not 1.0 < p < math.inf:
        raise ValueError(f"Schatten exponent p = {p} outside 1 < p < inf")
    if kmax is None:
        kmax = matched_kmax(w, degree)
    grid = dyadic_radii(w, kmax)
    growth = s_star_growth(w, grid)
    if growth > 1.5:
        warnings.warn(
            f"rho*/rho keeps growing toward the boundary (factor {growth:.3g} "
            f"across the sampled depths, sup {s_star_ratio(w, grid):.3g}); the "
            "Schatten criteria are not expected to be equivalent for such weights",
            stacklevel=2,
        )
    quad = quad or QuadSpec(seed=seed)

    if isinstance(mu, RadialDensityMeasure):
        s_pow = _schatten_pow_radial(mu, w, degree, p)

        def F_muhat(r):
            out = np.empty_like(r)
            for i, ri in enumerate(np.atleast_1d(r)):
                z = np.zeros(w.n, dtype=complex)
                z[0] = ri
                out[i] = mu_hat(mu, grid, z, alpha, seed=seed)
            return out

        def F_berezin(r):
            return np.array([_radial_berezin_abs(mu, w, ri) for ri in np.atleast_1d(r)])

        muh = lp_lambda_integral(F_muhat, w, grid, p, quad, radial=True)
        ber = lp_lambda_integral(F_berezin, w, grid, p, quad, radial=True)
    else:
        from .toeplitz import assemble

        T = assemble(mu, w, degree, seed=seed)
        s_pow = schatten_norm(T, p) ** p
        ks = kernel_series(w, kernel_degree)

        def F_muhat(pts):
            return np.array([mu_hat(mu, grid, z, alpha, seed=seed) for z in pts])

        def F_berezin(pts):
            return np.array([berezin(mu, ks, z, seed=seed) for z in pts])

        muh = lp_lambda_integral(F_muhat, w, grid, p, quad, radial=False)
        ber = lp_lambda_integral(F_berezin, w, grid, p, quad, radial=False)

    sens = None
    if sensitivity:
        sens = {}
        for a2 in sensitivity:
            if isinstance(mu, RadialDensityMeasure):
                def F2(r, a2=a2):
                    out = np.empty_like(r)
                    for i, ri in enumerate(np.atleast_1d(r)):
                        z = np.zeros(w.n, dtype=complex)
                        z[0] = ri
                        out[i] = mu_hat(mu, grid, z, a2, seed=seed)
                    return out

                sens[a2] = lp_lambda_integral(F2, w, grid, p, quad, radial=True).total
            else:
                def F2(pts, a2=a2):
                    return np.array([mu_hat(mu, grid, z, a2, seed=seed) for z in pts])

                sens[a2] = lp_lambda_integral(F2, w, grid, p, quad, radial=False).total

    return SchattenReport(
        p=p,
        alpha=alpha,
        degree=degree,
        kmax=kmax,
        schatten_norm_p=s_pow ** (1.0 / p),
        schatten_p_pow=s_pow,
        integral_berezin=ber.total,
        integral_muhat=muh.total,
        r1=s_pow / muh.total if muh.total > 0 else math.inf,
        r2=s_pow / ber.total if ber.total > 0 else math.inf,
        muhat_tail=muh.tail_estimate,
        berezin_tail=ber.tail_estimate,
        diverging=muh.diverging or ber.diverging,
        alpha_sensitivity=sens,
    )


def theorem3_sweep(w, s_values, p_values, degree, alpha=0.2, kmax=None, quad=None, seed=0):
    """Reports for the family (1-r)^s rho dv across s and p values."""
    from .measures import radial_density_from_weight

    out = []
    for s in s_values:
        mu = radial_density_from_weight(w, s)
        for p in p_values:
            rep = theorem3_report(mu, w, p, degree, alpha=alpha, kmax=kmax,
                                  quad=quad, seed=seed)
            out.append((s, rep))
    return out


# -- dimension-effect slope experiment ---------------------------------


@dataclass
class RemarkReport:
    """Log-log slope of the ratio of the two averaged-density criteria."""

    n: int
    p: float
    eps: float
    gap_ratio: float
    rows: list  # (level, 1-|center|, integral_hat, integral_tilde, ratio)
    slope: float

    def to_json(self):
        return {
            "n": self.n,
            "p": self.p,
            "eps": self.eps,
            "gap_ratio": self.gap_ratio,
            "slope": self.slope,
            "rows": [
                {
                    "level": lv,
                    "one_minus_center": om,
                    "integral_hat": ih,
                    "integral_tilde": it,
                    "ratio": rt,
                }
                for (lv, om, ih, it, rt) in self.rows
            ],
        }


def _lambda_factor(w, grid, pts):
    mags = np.linalg.norm(pts, axis=1)
    ks = annulus_index(grid, mags).astype(float)
    u = 1.0 - mags
    return 2.0**ks * w.rho_u(u) / u**w.n


def remark_experiment(n, p, eps=0.1, gap_ratio=0.25, levels=6, weight=None,
                      first_level=2, m_outer=12, m_inner=11, seed=0):
    """Slope of int muhat_eps^p dlambda over int mutilde_eps^p dlambda.

    One indicator ball B(z_j, eps (1-|z_j|)) is placed per level with
    1 - |z_j| = gap_ratio^(first_level + j).  For each level the two
    averaged densities

        mutilde(z) = mu(B(z, eps (1-|z|))) / (1-|z|)^(2n)
        muhat(z)   = 2^k mu(E(z, eps)) / (1-|z|)^n

    are integrated in the p-th power against d lambda over a local
    domain containing their support (checked), and the log-log slope of
    the ratio against 1 - |z_j| is fitted.  The Euclidean ball volume
    scales as (1-|z|)^(2n) while the metric ball scales as
    (1-|z|)^(n+1), so the expected slope is (n-1)(p-1): zero exactly in
    dimension one.
    """
    if levels < 4:
        raise ValueError("need at least 4 levels for a slope fit")
    if not 1.0 < p < math.inf:
        raise ValueError(f"exponent p = {p} outside 1 < p < inf")
    if weight is None:
        from .weights import normalize

        weight = normalize("constant", n=n)
    if weight.n != n:
        raise ValueError("weight dimension differs from requested n")

    deltas = np.array([gap_ratio ** (first_level + j) for j in range(levels)])
    # grid deep enough to index every sampled point
    u_min = float(deltas[-1]) * (1.0 - 0.5 * eps) * (1.0 - math.tanh(2.5 * eps)) / 2.0
    kneed = int(math.ceil(-math.log2(weight.tail_u(u_min)))) + 2
    grid = dyadic_radii(weight, kneed)

    rows = []
    for j, dj in enumerate(deltas):
        center = np.zeros(n, dtype=complex)
        center[0] = 1.0 - dj
        ball_r = eps * dj
        inner_pts, vol_b = euclidean_ball_points(center, ball_r, m_inner, seed + 101 * j)

        # -- tilde integral over a Euclidean neighbourhood -------------
        dom_r = 3.0 * eps * dj
        outer, vol_dom = euclidean_ball_points(center, dom_r, m_outer, seed + 101 * j + 1)
        mags = np.linalg.norm(outer, axis=1)
        frac = _ball_hit_fraction(outer, inner_pts, eps * (1.0 - mags))
        mutilde = vol_b * frac / (1.0 - mags) ** (2 * n)
        lam = _lambda_factor(weight, grid, outer)
        _check_support(frac, np.linalg.norm(outer - center, axis=1) / dom_r, "tilde")
        i_tilde = vol_dom * float(np.mean(mutilde**p * lam))

        # -- hat integral over a Bergman neighbourhood ------------------
        radial_out = center.copy()
        radial_out[0] += ball_r
        beta_ball = float(bergman_dist(center, radial_out))
        s_dom = eps + beta_ball + 0.25 * eps
        outer_h, vol_h = ellipsoid_points(center, s_dom, m_outer, seed + 101 * j + 2)
        mags_h = np.linalg.norm(outer_h, axis=1)
        frac_h = _bergman_hit_fraction(outer_h, inner_pts, eps)
        ks = annulus_index(grid, mags_h).astype(float)
        muhat_v = 2.0**ks * vol_b * frac_h / (1.0 - mags_h) ** n
        lam_h = _lambda_factor(weight, grid, outer_h)
        ell = _ellipsoid_coordinate(outer_h, center, s_dom)
        _check_support(frac_h, ell, "hat")
        i_hat = vol_h * float(np.mean(muhat_v**p * lam_h))

        rows.append((j, float(dj), i_hat, i_tilde, i_hat / i_tilde))

    logs_d = np.log(deltas)
    logs_r = np.log([r[4] for r in rows])
    slope = float(np.polyfit(logs_d, logs_r, 1)[0])
    return RemarkReport(n, p, eps, gap_ratio, rows, slope)


def _ball_hit_fraction(outer, inner_pts, radii):
    """fraction of inner_pts within Euclidean distance radii[i] of outer[i]."""
    out = np.empty(len(outer))
    chunk = max(1, 2**22 // max(1, len(inner_pts)))
    for i0 in range(0, len(outer), chunk):
        blk = outer[i0 : i0 + chunk]
        d2 = np.sum(
            np.abs(blk[:, None, :] - inner_pts[None, :, :]) ** 2, axis=2
        )
        out[i0 : i0 + chunk] = np.mean(d2 < radii[i0 : i0 + chunk, None] ** 2, axis=1)
    return out


def _bergman_hit_fraction(outer, inner_pts, alpha):
    """fraction of inner_pts within Bergman distance alpha of each outer point."""
    thresh = 1.0 / math.cosh(alpha) ** 2
    one_o = 1.0 - np.sum(np.abs(outer) ** 2, axis=1)
    one_i = 1.0 - np.sum(np.abs(inner_pts) ** 2, axis=1)
    out = np.empty(len(outer))
    chunk = max(1, 2**22 // max(1, len(inner_pts)))
    for i0 in range(0, len(outer), chunk):
        blk = outer[i0 : i0 + chunk]
        cross = np.abs(1.0 - blk @ np.conj(inner_pts.T)) ** 2
        A = one_o[i0 : i0 + chunk, None] * one_i[None, :] / cross
        out[i0 : i0 + chunk] = np.mean(A > thresh, axis=1)
    return out


def _ellipsoid_coordinate(pts, center, alpha):
    """Radial coordinate of pts within E(center, alpha) (1 = boundary)."""
    from .geometry import bergman_ball_params, unitary_frame

    c, s1, s2, frame = bergman_ball_params(center, alpha)
    rel = (pts - c) @ np.conj(frame)
    scale = np.full(pts.shape[1], s2)
    scale[0] = s1
    return np.sqrt(np.sum(np.abs(rel / scale) ** 2, axis=1))


def _check_support(frac, rel_radius, tag):
    hit = frac > 0
    if np.any(hit) and float(np.max(rel_radius[hit])) > 0.98:
        raise PrecisionError(
            f"support of the {tag}-integrand reaches the integration domain "
            "boundary; enlarge the domain margin"
        )
