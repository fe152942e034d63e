"""Normalized radial weights on the unit ball and their dyadic structure.

A weight is a positive, continuous, integrable function rho on [0, 1),
extended to the ball by rho(z) = rho(|z|) and normalized so that

    int_0^1 x^(2n-1) rho(x) dx = 1.

Two derived objects drive everything downstream:

* the tail T(r) = int_r^1 rho(x) dx, and the radii r_k where it halves,
  T(r_k) = 2^(-k), which split the ball into annuli;
* the radial moments m_d = 2n int_0^1 r^(2d+2n-1) rho(r) dr, which are
  the squared norms of monomials up to a sphere constant.

All boundary-sensitive quantities are computed in the variable u = 1 - r
to avoid cancellation: near the boundary u underflows gracefully while
1 - (1 - u) would lose every significant digit.
"""

import math

import numpy as np
from scipy import integrate, optimize, special

from .errors import GridRangeError

__all__ = [
    "Weight",
    "DyadicGrid",
    "normalize",
    "tail",
    "dyadic_radii",
    "class_s_ratio",
    "moment",
    "rho_star",
    "s_star_ratio",
]

_LOG2 = math.log(2.0)

#: Families with closed-form tails and moments.
CLOSED_FAMILIES = ("constant", "power", "standard")

_QUAD_OPTS = dict(epsabs=1e-14, epsrel=1e-13, limit=400)


def _quad(f, a, b, **kw):
    opts = dict(_QUAD_OPTS)
    opts.update(kw)
    val, err = integrate.quad(f, a, b, **opts)
    if not np.isfinite(val):
        raise ValueError("quadrature returned a non-finite value")
    return val


class Weight:
    """A normalized radial weight rho on [0, 1) extended to the ball.

    Instances are immutable after construction apart from an internal
    moment cache, which is append-only and therefore safe to share
    between read-only workers.  Use :func:`normalize` to build one.
    """

    def __init__(self, n, family, params, norm_const):
        self.n = int(n)
        self.family = family
        self.params = dict(params)
        self.c = float(norm_const)
        self._moment_cache = {}
        self._log_moment_arr = None

    # -- evaluation --------------------------------------------------

    def rho(self, r):
        """Weight value at radius r (vectorized), r in [0, 1)."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r >= 1):
            raise ValueError("rho is defined on [0, 1)")
        return self.c * self._raw_rho_u(1.0 - r)

    def rho_u(self, u):
        """Weight value at radius 1 - u, evaluated without cancellation."""
        u = np.asarray(u, dtype=float)
        return self.c * self._raw_rho_u(u)

    def _raw_rho_u(self, u):
        n, fam, p = self.n, self.family, self.params
        u = np.asarray(u, dtype=float)
        if fam == "constant":
            return np.ones_like(u)
        if fam == "power":
            return u ** (-p["beta"])
        if fam == "log_power":
            # log(e/u) >= 1 on (0, 1]; same boundary asymptotics as log(1/u)
            return u ** (-p["beta"]) * (1.0 - np.log(u)) ** p["alpha"]
        if fam == "standard":
            r = 1.0 - u
            return (u * (1.0 + r)) ** p["alpha"]
        if fam == "tabulated":
            rs, logs = p["_rs"], p["_logrho"]
            r = 1.0 - u
            out = np.interp(r, rs, logs)
            # extend the first/last log-linear segment beyond the samples
            slopes = np.diff(logs) / np.diff(rs)
            lo, hi = r < rs[0], r > rs[-1]
            out = np.where(lo, logs[0] + slopes[0] * (r - rs[0]), out)
            out = np.where(hi, logs[-1] + slopes[-1] * (r - rs[-1]), out)
            return np.exp(out)
        raise ValueError(f"unknown weight family {fam!r}")

    # -- tails -------------------------------------------------------

    def tail(self, r):
        """T(r) = int_r^1 rho(x) dx. Decreasing, T(r) -> 0 as r -> 1."""
        r = np.asarray(r, dtype=float)
        if np.any(r < 0) or np.any(r >= 1):
            raise ValueError("tail is defined for r in [0, 1)")
        return self.tail_u(1.0 - r)

    def tail_u(self, u):
        """Tail at radius 1 - u, i.e. int over (1-u, 1), computed in u."""
        scalar = np.isscalar(u)
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u <= 0) or np.any(u > 1):
            raise ValueError("tail_u expects u in (0, 1]")
        n, fam, p = self.n, self.family, self.params
        if fam == "constant":
            out = self.c * u
        elif fam == "power":
            b = p["beta"]
            out = self.c * u ** (1.0 - b) / (1.0 - b)
        elif fam == "standard":
            a = p["alpha"]
            out = (
                self.c
                * 2.0 ** (2 * a + 1)
                * special.beta(a + 1, a + 1)
                * special.betainc(a + 1, a + 1, u / 2.0)
            )
        elif fam == "log_power":
            b, a = p["beta"], p["alpha"]
            if b == 1.0:
                # substitute s = 1 - log t:  int_0^u t^-1 (1-log t)^a dt
                s = 1.0 - np.log(u)
                out = self.c * s ** (a + 1.0) / (-a - 1.0)
            else:
                out = np.array(
                    [self.c * _logpower_tail_raw(b, a, ui) for ui in u]
                )
        elif fam == "tabulated":
            out = np.array([self.c * self._tab_tail_raw(ui) for ui in u])
        else:
            raise ValueError(f"unknown weight family {fam!r}")
        return float(out[0]) if scalar else out

    def _tab_tail_raw(self, u):
        # piecewise r -> exp(a + b r); segments integrate in closed form
        rs, logs = self.params["_rs"], self.params["_logrho"]
        r0 = 1.0 - u
        total = 0.0
        # extend the last segment slope up to r = 1
        slopes = np.diff(logs) / np.diff(rs)
        knots = list(rs) + [1.0]
        seg_slope = list(slopes) + [slopes[-1] if len(slopes) else 0.0]
        seg_a = list(logs) + [logs[-1]]
        for i in range(len(knots) - 1):
            lo, hi = knots[i], knots[i + 1]
            if hi <= r0:
                continue
            lo = max(lo, r0)
            b, a = seg_slope[i], seg_a[i] - seg_slope[i] * knots[i]
            if abs(b) < 1e-14:
                total += math.exp(a) * (hi - lo)
            else:
                total += (math.exp(a + b * hi) - math.exp(a + b * lo)) / b
        return total

    # -- moments -----------------------------------------------------

    def moment(self, d):
        """m_d = 2n int_0^1 r^(2d+2n-1) rho(r) dr; m_0 = 2n; decreasing."""
        d = int(d)
        if d < 0:
            raise ValueError("moment order must be nonnegative")
        if d not in self._moment_cache:
            self._moment_cache[d] = float(np.exp(self.log_moments(d)[d]))
        return self._moment_cache[d]

    def moments(self, dmax):
        """Array m_0 .. m_dmax (eagerly cached)."""
        return np.exp(self.log_moments(dmax))

    def log_moments(self, dmax):
        """log m_d for d = 0 .. dmax, vectorized for closed families."""
        if self._log_moment_arr is None or len(self._log_moment_arr) <= dmax:
            n, fam, p = self.n, self.family, self.params
            grow = dmax
            if self._log_moment_arr is not None and fam in CLOSED_FAMILIES:
                grow = max(dmax, 2 * len(self._log_moment_arr))  # amortize regrowth
            d = np.arange(grow + 1, dtype=float)
            if fam == "constant":
                out = math.log(4.0 * n * n) - np.log(2 * d + 2 * n)
            elif fam == "power":
                out = math.log(2 * n * self.c) + special.betaln(2 * d + 2 * n, 1 - p["beta"])
            elif fam == "standard":
                out = math.log(n * self.c) + special.betaln(d + n, p["alpha"] + 1)
            else:
                out = np.log([self._moment_quad(int(k)) for k in range(grow + 1)])
            self._log_moment_arr = out
        return self._log_moment_arr[: dmax + 1]

    def _moment_quad(self, d):
        n = self.n
        power = 2 * d + 2 * n - 1
        if self.family == "log_power":
            b, a = self.params["beta"], self.params["alpha"]

            def f(s):
                t = math.exp(1.0 - s)
                return (1.0 - t) ** power * math.exp((1.0 - s) * (1.0 - b)) * s**a

            return 2 * n * self.c * _quad(f, 1.0, np.inf)
        val = _quad(lambda r: r**power * float(self.rho(r)), 0.0, 1.0,
                    points=[1.0 - 1e-6] if d > 50 else None)
        return 2 * n * val

    # -- diagnostics -------------------------------------------------

    def normalization_residual(self):
        """|int_0^1 x^(2n-1) rho - 1|, evaluated by adaptive quadrature.

        Algebraic endpoint singularities are passed to the QAWS rule so
        the check itself does not limit the attainable precision.
        """
        n = self.n
        c = self.c
        if self.family == "log_power":
            b, a = self.params["beta"], self.params["alpha"]

            def f(s):
                t = math.exp(1.0 - s)
                return (1.0 - t) ** (2 * n - 1) * math.exp((1.0 - s) * (1.0 - b)) * s**a

            val = c * _quad(f, 1.0, np.inf)
        elif self.family == "power":
            b = self.params["beta"]
            val = c * _quad(lambda x: x ** (2 * n - 1), 0.0, 1.0,
                            weight="alg", wvar=(0.0, -b))
        elif self.family == "standard":
            a = self.params["alpha"]
            val = c * _quad(lambda x: x ** (2 * n - 1) * (1.0 + x) ** a, 0.0, 1.0,
                            weight="alg", wvar=(0.0, a))
        else:
            val = _quad(lambda x: x ** (2 * n - 1) * float(self.rho(x)), 0.0, 1.0)
        return abs(val - 1.0)

    def to_json(self):
        p = {k: v for k, v in self.params.items() if not k.startswith("_")}
        return {"n": self.n, "family": self.family, **p}

    def __repr__(self):
        p = {k: v for k, v in self.params.items() if not k.startswith("_")}
        return f"Weight(n={self.n}, family={self.family!r}, params={p}, c={self.c:.6g})"


def _logpower_tail_raw(b, a, u):
    # int_0^u t^-b (1 - log t)^a dt with s = 1 - log t
    s0 = 1.0 - math.log(u)

    def f(s):
        return math.exp((1.0 - s) * (1.0 - b)) * s**a

    return _quad(f, s0, np.inf)


def _raw_normalization_integral(n, family, params):
    """int_0^1 x^(2n-1) rho_raw(x) dx for the unnormalized profile."""
    if family == "constant":
        return 1.0 / (2 * n)
    if family == "power":
        return special.beta(2 * n, 1.0 - params["beta"])
    if family == "standard":
        return 0.5 * special.beta(n, params["alpha"] + 1.0)
    if family == "log_power":
        b, a = params["beta"], params["alpha"]

        def f(s):
            t = math.exp(1.0 - s)
            return (1.0 - t) ** (2 * n - 1) * math.exp((1.0 - s) * (1.0 - b)) * s**a

        return _quad(f, 1.0, np.inf)
    if family == "tabulated":
        rs, logs = params["_rs"], params["_logrho"]
        slopes = np.diff(logs) / np.diff(rs)
        knots = np.concatenate([rs, [1.0]])
        total = 0.0
        xs, ws = np.polynomial.legendre.leggauss(32)
        for i in range(len(knots) - 1):
            lo, hi = knots[i], knots[i + 1]
            if hi <= lo:
                continue
            bsl = slopes[min(i, len(slopes) - 1)] if len(slopes) else 0.0
            asl = logs[min(i, len(logs) - 1)] - bsl * rs[min(i, len(rs) - 1)]
            x = 0.5 * (hi - lo) * xs + 0.5 * (hi + lo)
            total += 0.5 * (hi - lo) * np.sum(
                ws * x ** (2 * n - 1) * np.exp(asl + bsl * x)
            )
        return total
    raise ValueError(f"unknown weight family {family!r}")


def normalize(family, params=None, n=1):
    """Build a normalized Weight of the given family.

    Parameters
    ----------
    family : str
        One of ``constant``, ``power`` (beta in (0,1)), ``log_power``
        (beta <= 1, with alpha < -1 required when beta == 1),
        ``standard`` (alpha > -1) or ``tabulated`` (samples).
    params : dict, optional
        Family parameters, e.g. ``{"beta": 0.5}``.
    n : int
        Complex dimension of the ball.

    The returned weight satisfies int_0^1 x^(2n-1) rho = 1 to 1e-12.
    Non-integrable parameter choices are rejected with a diagnostic.
    """
    params = dict(params or {})
    n = int(n)
    if n < 1:
        raise ValueError("dimension n must be a positive integer")
    if family == "power":
        b = params.get("beta")
        if b is None or not (0.0 < b < 1.0):
            raise ValueError(
                f"power weight needs beta in (0, 1); got beta={b!r} "
                "(beta >= 1 is not integrable without a log factor)"
            )
    elif family == "log_power":
        b, a = params.get("beta"), params.get("alpha")
        if b is None or a is None:
            raise ValueError("log_power weight needs beta and alpha")
        if b > 1.0 or b <= 0.0:
            raise ValueError(f"log_power needs 0 < beta <= 1; got {b!r}")
        if b == 1.0 and a >= -1.0:
            raise ValueError(
                "log_power with beta = 1 needs alpha < -1 for integrability"
            )
    elif family == "standard":
        a = params.get("alpha")
        if a is None or a <= -1.0:
            raise ValueError(f"standard weight needs alpha > -1; got {a!r}")
    elif family == "tabulated":
        samples = params.get("samples")
        if not samples or len(samples) < 2:
            raise ValueError("tabulated weight needs at least two (r, rho) samples")
        arr = np.asarray(samples, dtype=float)
        if np.any(arr[:, 1] <= 0) or np.any(arr[:, 0] < 0) or np.any(arr[:, 0] >= 1):
            raise ValueError("tabulated samples need r in [0,1) and rho > 0")
        order = np.argsort(arr[:, 0])
        params["_rs"] = arr[order, 0]
        params["_logrho"] = np.log(arr[order, 1])
    elif family != "constant":
        raise ValueError(f"unknown weight family {family!r}")

    integral = _raw_normalization_integral(n, family, params)
    if not np.isfinite(integral) or integral <= 0:
        raise ValueError(f"family {family!r} with {params} is not integrable")
    w = Weight(n, family, params, 1.0 / integral)
    res = w.normalization_residual()
    if res > 1e-12:
        raise ValueError(f"normalization failed: residual {res:.3e} > 1e-12")
    return w


class DyadicGrid:
    """Radii r_0 < r_1 < ... where the weight tail halves.

    ``radii`` holds r_0 .. r_{kmax+1} (one guard radius beyond kmax so
    that every annulus Omega_k = {r_k <= |z| < r_{k+1}}, k <= kmax, has
    both edges).  ``one_minus`` holds the same radii as 1 - r_k at full
    relative precision; downstream code should prefer it near the
    boundary.
    """

    def __init__(self, radii, one_minus, kmax):
        self.radii = np.asarray(radii, dtype=float)
        self.one_minus = np.asarray(one_minus, dtype=float)
        self.kmax = int(kmax)
        self.ratios = self.one_minus[:-1] / self.one_minus[1:]
        self.inf_ratio = float(np.min(self.ratios))

    def __len__(self):
        return len(self.radii)

    def annulus_bounds_u(self, k):
        """(1 - r_k, 1 - r_{k+1}) for annulus k."""
        if not 0 <= k <= self.kmax:
            raise GridRangeError(f"annulus {k} outside computed range 0..{self.kmax}")
        return self.one_minus[k], self.one_minus[k + 1]

    def to_rows(self):
        """CSV rows (k, r_k, ratio to next radius)."""
        return [
            (k, self.radii[k], self.ratios[k] if k < len(self.ratios) else math.nan)
            for k in range(len(self.radii))
        ]


def dyadic_radii(w, kmax):
    """Solve tail(r_k) = 2^-k for k = 0 .. kmax + 1 by bracketed root-finding.

    The root is found in x = log(1 - r): the objective
    g(x) = log tail_u(e^x) + k log 2 is smooth and strictly monotone, so
    Brent's method converges to machine precision and the tail residual
    |tail(r_k) - 2^-k| stays below 1e-13 * 2^-k.
    """
    if kmax < 0:
        raise ValueError("kmax must be nonnegative")
    t0 = w.tail_u(1.0)
    if t0 < 1.0 - 1e-12:
        raise ValueError(f"tail(0) = {t0:.6g} < 1; weight is not normalized")
    us = []
    x_hi = 0.0
    for k in range(kmax + 2):
        target = k * _LOG2

        def g(x, target=target):
            return math.log(w.tail_u(math.exp(x))) + target

        if g(x_hi) < 0:
            # tail(0) == 2^-k exactly only at k = 0 with tail(0) == 1
            if k == 0 and abs(g(0.0)) < 1e-12:
                us.append(1.0)
                continue
            raise ValueError("root bracket failure: tail(0) below target")
        x_lo = x_hi - _LOG2
        while g(x_lo) > 0:
            x_lo -= _LOG2
            if x_lo < -700:
                raise ValueError(
                    f"root bracket failure for k={k}: 1 - r_{k} underflows double "
                    "precision for this weight; use a smaller kmax"
                )
        x = optimize.brentq(g, x_lo, x_hi, xtol=1e-15, rtol=8.9e-16, maxiter=200)
        us.append(math.exp(x))
        x_hi = x  # radii increase, so u decreases
    us = np.asarray(us)
    if np.any(np.diff(us) >= 0):
        raise ValueError("computed radii are not strictly increasing")
    # radii this deep may round to 1.0 in double; one_minus keeps full precision
    radii = 1.0 - us
    return DyadicGrid(radii, us, kmax)


# -- module-level operation aliases ----------------------------------


def tail(w, r):
    """Tail integral int_r^1 rho(x) dx."""
    return w.tail(r)


def moment(w, d):
    """Radial moment m_d = 2n int_0^1 r^(2d+2n-1) rho(r) dr."""
    return w.moment(d)


def class_s_ratio(grid):
    """inf over computed k of (1 - r_k)/(1 - r_{k+1}).

    A value > 1 + margin over the computed range is empirical evidence
    that the weight belongs to the dyadically doubling class; it is a
    truncated check, never a proof.
    """
    if len(grid.radii) < 2:
        raise ValueError("grid needs at least two radii")
    return grid.inf_ratio


def rho_star(w, r):
    """rho*(r) = tail(r)/(1 - r) (vectorized)."""
    r = np.asarray(r, dtype=float)
    u = 1.0 - r
    return w.tail_u(u) / u


def _s_star_samples(w, grid, extra_points=4):
    us = grid.one_minus
    mids = np.sqrt(us[:-1] * us[1:])
    sample_u = np.unique(np.concatenate([us, mids]))
    for _ in range(extra_points):
        sample_u = np.unique(np.concatenate([sample_u, np.sqrt(sample_u[:-1] * sample_u[1:])]))
    vals = w.tail_u(sample_u) / sample_u / w.rho_u(sample_u)
    return sample_u, vals


def s_star_ratio(w, grid, extra_points=4):
    """sup over a sample grid of rho*(r)/rho(r).

    The sample uses the dyadic radii and geometric midpoints between
    them (in u = 1 - r).  A bounded sup is empirical evidence that the
    tail-average rho* is dominated by rho; a growing sup means it is not.
    """
    _, vals = _s_star_samples(w, grid, extra_points)
    return float(np.max(vals))


def s_star_growth(w, grid, extra_points=4):
    """Growth factor of rho*/rho across the sampled depth range.

    Returns max over the deepest quarter of the sample divided by max
    over the shallowest half (samples ordered by depth).  Near 1 for
    weights whose rho*/rho stabilizes; substantially above 1 when the
    ratio keeps growing toward the boundary, the empirical signature of
    weights outside the tail-dominated subclass.
    """
    sample_u, vals = _s_star_samples(w, grid, extra_points)
    order = np.argsort(-sample_u)  # shallow (large u) first
    vals = vals[order]
    shallow = vals[: max(1, len(vals) // 2)]
    deep = vals[-max(1, len(vals) // 4):]
    return float(np.max(deep) / np.max(shallow))
