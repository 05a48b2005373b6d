"""Distribution families backing parametric forecasts.

Four families are supported: Gaussian, Student-t, piecewise-linear
empirical interpolants (reconstructed from quantile grids or samples),
and interpolants spliced with generalized Pareto (GPD) tails.  Every
family exposes ``cdf``, ``quantile``, ``density``/``log_density``,
``mean``, and the fitting routines ``fit_mle``, ``empirical_cdf`` and
``fit_gpd_tail``.

Parameter records are permissive containers: constructing one with an
invalid value (say ``sigma=0``) does not raise, so that documents parsed
from external sources can be validated and reported on.  Every
*operation* checks validity first and raises :class:`InputError`.

A note on interpolants: quantile queries outside the breakpoint grid
are refused (tail extrapolation needs a tail model, see
:func:`fit_gpd_tail`), while CDF queries outside the value hull return
the step-function limits 0 and 1 (the mass outside the grid is treated
as sitting at the nearest endpoint).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special, stats

from fforms.errors import FitConvergenceError, InputError

GAUSSIAN = "gaussian"
STUDENT_T = "student_t"
EMPIRICAL = "empirical"
SPLICED_GPD = "spliced_gpd"

FAMILIES = (GAUSSIAN, STUDENT_T, EMPIRICAL, SPLICED_GPD)


# ---------------------------------------------------------------------------
# Parameter records
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gaussian:
    """Normal distribution with location ``mu`` and scale ``sigma``."""

    mu: float
    sigma: float

    family = GAUSSIAN

    def issues(self) -> list[str]:
        out = []
        if not (math.isfinite(self.mu) and math.isfinite(self.sigma)):
            out.append("non-finite gaussian parameter")
        elif self.sigma <= 0.0:
            out.append(f"sigma must be > 0 (got {self.sigma})")
        return out


@dataclass(frozen=True)
class StudentT:
    """Student-t with location ``mu``, scale ``sigma`` and ``nu`` degrees
    of freedom."""

    mu: float
    sigma: float
    nu: float

    family = STUDENT_T

    def issues(self) -> list[str]:
        out = []
        if not all(map(math.isfinite, (self.mu, self.sigma, self.nu))):
            out.append("non-finite student_t parameter")
        else:
            if self.sigma <= 0.0:
                out.append(f"sigma must be > 0 (got {self.sigma})")
            if self.nu <= 0.0:
                out.append(f"nu must be > 0 (got {self.nu})")
        return out


class EmpiricalInterpolant:
    """Piecewise-linear CDF through breakpoints ``(prob, value)``.

    Probabilities must be strictly ascending in (0, 1]; values must be
    non-decreasing (ties encode atoms).  Quantile queries are defined
    only on ``[probs[0], probs[-1]]``; anything outside raises, because
    the grid carries no tail information.
    """

    family = EMPIRICAL

    def __init__(self, probs, values):
        probs = np.asarray(probs, dtype=float)
        values = np.asarray(values, dtype=float)
        if probs.ndim != 1 or probs.shape != values.shape or probs.size == 0:
            raise InputError("breakpoints must be two equal-length 1-d sequences")
        probs.flags.writeable = False
        values.flags.writeable = False
        self.probs = probs
        self.values = values

    def issues(self) -> list[str]:
        out = []
        if not np.all(np.isfinite(self.probs)) or not np.all(np.isfinite(self.values)):
            out.append("non-finite breakpoint")
            return out
        if np.any(self.probs <= 0.0) or np.any(self.probs > 1.0):
            out.append("breakpoint probabilities must lie in (0, 1]")
        if np.any(np.diff(self.probs) <= 0.0):
            out.append("breakpoint probabilities not strictly ascending")
        if np.any(np.diff(self.values) < 0.0):
            out.append("breakpoint values not non-decreasing")
        return out

    def __eq__(self, other):
        return (
            isinstance(other, EmpiricalInterpolant)
            and np.array_equal(self.probs, other.probs)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"EmpiricalInterpolant({len(self.probs)} breakpoints)"


@dataclass(frozen=True)
class GPDTail:
    """Generalized Pareto tail attached to a body distribution.

    ``attach_prob`` is the CDF level of the attach point: a lower tail
    models quantile levels below it, an upper tail levels above it.
    """

    xi: float
    beta: float
    attach_prob: float

    def issues(self) -> list[str]:
        out = []
        if not all(map(math.isfinite, (self.xi, self.beta, self.attach_prob))):
            out.append("non-finite GPD parameter")
            return out
        if self.beta <= 0.0:
            out.append(f"GPD scale must be > 0 (got {self.beta})")
        if not 0.0 < self.attach_prob < 1.0:
            out.append(f"attach_prob must lie in (0, 1) (got {self.attach_prob})")
        return out


@dataclass(frozen=True)
class SplicedGPDTails:
    """Interpolant body with GPD tails spliced on at the attach points.

    The body's outermost breakpoint probabilities are the attach levels;
    continuity of the CDF there holds by construction.  Either tail may
    be absent, in which case queries beyond that side behave like the
    bare interpolant.
    """

    body: EmpiricalInterpolant
    lower: GPDTail | None = None
    upper: GPDTail | None = None

    family = SPLICED_GPD

    def issues(self) -> list[str]:
        out = list(self.body.issues())
        if self.lower is not None:
            out += [f"lower tail: {s}" for s in self.lower.issues()]
            if not out and abs(self.lower.attach_prob - self.body.probs[0]) > 1e-12:
                out.append("lower attach_prob does not match body grid")
        if self.upper is not None:
            out += [f"upper tail: {s}" for s in self.upper.issues()]
            if not out and abs(self.upper.attach_prob - self.body.probs[-1]) > 1e-12:
                out.append("upper attach_prob does not match body grid")
        return out


FamilyParams = Gaussian | StudentT | EmpiricalInterpolant | SplicedGPDTails


def require_valid(params: FamilyParams) -> None:
    """Raise :class:`InputError` if the parameter record is invalid."""
    problems = params.issues()
    if problems:
        raise InputError(f"invalid {params.family} parameters: {'; '.join(problems)}")


# ---------------------------------------------------------------------------
# CDF / quantile / density / mean
# ---------------------------------------------------------------------------

def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


def cdf(params: FamilyParams, x):
    """P(X <= x) for the given family; vectorized over ``x``."""
    require_valid(params)
    arr, scalar = _as_array(x)
    if isinstance(params, Gaussian):
        return _ret(stats.norm.cdf(arr, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, StudentT):
        return _ret(stats.t.cdf(arr, df=params.nu, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, EmpiricalInterpolant):
        return _ret(_interp_cdf(params, arr), scalar)
    if isinstance(params, SplicedGPDTails):
        return _ret(_spliced_cdf(params, arr), scalar)
    raise InputError(f"unknown family {params!r}")


def quantile(params: FamilyParams, q):
    """Inverse CDF at levels ``q`` in (0, 1); vectorized over ``q``."""
    require_valid(params)
    arr, scalar = _as_array(q)
    if np.any(arr <= 0.0) or np.any(arr >= 1.0):
        raise InputError("quantile levels must lie in the open interval (0, 1)")
    if isinstance(params, Gaussian):
        return _ret(stats.norm.ppf(arr, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, StudentT):
        return _ret(stats.t.ppf(arr, df=params.nu, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, EmpiricalInterpolant):
        lo, hi = params.probs[0], params.probs[-1]
        if np.any(arr < lo - 1e-12) or np.any(arr > hi + 1e-12):
            raise InputError(
                f"tail query outside interpolated grid [{lo}, {hi}]; "
                "no tail model available (splice GPD tails or re-grid)"
            )
        return _ret(np.interp(arr, params.probs, params.values), scalar)
    if isinstance(params, SplicedGPDTails):
        return _ret(_spliced_quantile(params, arr), scalar)
    raise InputError(f"unknown family {params!r}")


def density(params: FamilyParams, x):
    """Probability density at ``x`` (piecewise-constant for interpolants)."""
    require_valid(params)
    arr, scalar = _as_array(x)
    if isinstance(params, Gaussian):
        return _ret(stats.norm.pdf(arr, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, StudentT):
        return _ret(stats.t.pdf(arr, df=params.nu, loc=params.mu, scale=params.sigma), scalar)
    if isinstance(params, EmpiricalInterpolant):
        return _ret(_interp_density(params, arr), scalar)
    if isinstance(params, SplicedGPDTails):
        return _ret(_spliced_density(params, arr), scalar)
    raise InputError(f"unknown family {params!r}")


def log_density(params: FamilyParams, x):
    """log of :func:`density`, floored at 1e-300 before taking the log."""
    dens = density(params, x)
    return np.log(np.maximum(dens, 1e-300)) if isinstance(dens, np.ndarray) else math.log(max(dens, 1e-300))


def mean(params: FamilyParams) -> float:
    """Expected value; closed form where available.

    Interpolant means treat the mass outside the grid as sitting at the
    nearest endpoint (matching the trapezoidal quantile-mean rule); GPD
    tails contribute their exact partial expectations when ``xi < 1``.
    """
    require_valid(params)
    if isinstance(params, Gaussian):
        return params.mu
    if isinstance(params, StudentT):
        if params.nu <= 1.0:
            raise InputError(f"mean undefined for student_t with nu={params.nu} <= 1")
        return params.mu
    if isinstance(params, EmpiricalInterpolant):
        return _interp_mean(params)
    if isinstance(params, SplicedGPDTails):
        return _spliced_mean(params)
    raise InputError(f"unknown family {params!r}")


# -- interpolant internals --------------------------------------------------

def _interp_cdf(p: EmpiricalInterpolant, x: np.ndarray) -> np.ndarray:
    v, pr = p.values, p.probs
    # np.interp returns the last fp at duplicated breakpoint values, which
    # is exactly the right-continuous choice at atoms
    out = np.interp(x, v, pr)
    out = np.where(x < v[0], 0.0, out)
    out = np.where(x >= v[-1], np.where(x > v[-1], 1.0, pr[-1]), out)
    return out


def _interp_density(p: EmpiricalInterpolant, x: np.ndarray) -> np.ndarray:
    v, pr = p.values, p.probs
    out = np.zeros_like(x)
    if v.size < 2:
        return out
    idx = np.clip(np.searchsorted(v, x, side="right") - 1, 0, v.size - 2)
    dv = v[idx + 1] - v[idx]
    dp = pr[idx + 1] - pr[idx]
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(dv > 0, dp / np.where(dv > 0, dv, 1.0), np.inf)
    inside = (x >= v[0]) & (x < v[-1])
    out[inside] = slope[inside]
    return out


def _interp_mean(p: EmpiricalInterpolant) -> float:
    v, pr = p.values, p.probs
    segments = 0.0
    if v.size > 1:
        segments = float(np.sum(np.diff(pr) * (v[:-1] + v[1:]) / 2.0))
    return float(pr[0] * v[0] + segments + (1.0 - pr[-1]) * v[-1])


# -- GPD tail internals -----------------------------------------------------

def _gpd_tail_excess_quantile(xi: float, beta: float, frac: np.ndarray) -> np.ndarray:
    """Quantile of the exceedance distribution: G^{-1}(1 - frac) where
    ``frac`` is the remaining tail fraction in (0, 1]."""
    frac = np.asarray(frac, dtype=float)
    if abs(xi) < 1e-12:
        return -beta * np.log(frac)
    return (beta / xi) * (frac ** (-xi) - 1.0)


def _gpd_tail_sf(xi: float, beta: float, z: np.ndarray) -> np.ndarray:
    """Survival fraction of the exceedance distribution at excess z >= 0."""
    z = np.maximum(np.asarray(z, dtype=float), 0.0)
    if abs(xi) < 1e-12:
        return np.exp(-z / beta)
    inner = 1.0 + xi * z / beta
    if xi < 0.0:
        inner = np.maximum(inner, 0.0)
    return inner ** (-1.0 / xi)


def _gpd_tail_pdf(xi: float, beta: float, z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if abs(xi) < 1e-12:
        return np.exp(-z / beta) / beta
    inner = 1.0 + xi * z / beta
    out = np.zeros_like(z)
    ok = inner > 0.0
    out[ok] = inner[ok] ** (-1.0 / xi - 1.0) / beta
    return out


def _spliced_cdf(p: SplicedGPDTails, x: np.ndarray) -> np.ndarray:
    body = p.body
    v_lo, v_hi = body.values[0], body.values[-1]
    p_lo, p_hi = body.probs[0], body.probs[-1]
    out = _interp_cdf(body, x)
    if p.lower is not None:
        below = x < v_lo
        if np.any(below):
            sf = _gpd_tail_sf(p.lower.xi, p.lower.beta, v_lo - x[below])
            out = out.copy()
            out[below] = p_lo * sf
    if p.upper is not None:
        above = x > v_hi
        if np.any(above):
            sf = _gpd_tail_sf(p.upper.xi, p.upper.beta, x[above] - v_hi)
            out = out.copy()
            out[above] = 1.0 - (1.0 - p_hi) * sf
    return out


def _spliced_quantile(p: SplicedGPDTails, q: np.ndarray) -> np.ndarray:
    body = p.body
    p_lo, p_hi = body.probs[0], body.probs[-1]
    out = np.empty_like(q)
    mid = (q >= p_lo) & (q <= p_hi)
    out[mid] = np.interp(q[mid], body.probs, body.values)
    low = q < p_lo
    if np.any(low):
        if p.lower is None:
            raise InputError("tail query below interpolated grid; no lower tail model")
        out[low] = body.values[0] - _gpd_tail_excess_quantile(
            p.lower.xi, p.lower.beta, q[low] / p_lo
        )
    high = q > p_hi
    if np.any(high):
        if p.upper is None:
            raise InputError("tail query above interpolated grid; no upper tail model")
        out[high] = body.values[-1] + _gpd_tail_excess_quantile(
            p.upper.xi, p.upper.beta, (1.0 - q[high]) / (1.0 - p_hi)
        )
    return out


def _spliced_density(p: SplicedGPDTails, x: np.ndarray) -> np.ndarray:
    body = p.body
    v_lo, v_hi = body.values[0], body.values[-1]
    p_lo, p_hi = body.probs[0], body.probs[-1]
    out = _interp_density(body, x)
    if p.lower is not None:
        below = x < v_lo
        out[below] = p_lo * _gpd_tail_pdf(p.lower.xi, p.lower.beta, v_lo - x[below])
    if p.upper is not None:
        above = x >= v_hi
        out[above] = (1.0 - p_hi) * _gpd_tail_pdf(p.upper.xi, p.upper.beta, x[above] - v_hi)
    return out


def _spliced_mean(p: SplicedGPDTails) -> float:
    body = p.body
    v, pr = body.values, body.probs
    p_lo, p_hi = pr[0], pr[-1]
    total = 0.0
    if v.size > 1:
        total += float(np.sum(np.diff(pr) * (v[:-1] + v[1:]) / 2.0))
    if p.lower is not None:
        if p.lower.xi >= 1.0:
            raise InputError("mean undefined: lower GPD tail with xi >= 1")
        total += p_lo * (v[0] - p.lower.beta / (1.0 - p.lower.xi))
    else:
        total += p_lo * v[0]
    if p.upper is not None:
        if p.upper.xi >= 1.0:
            raise InputError("mean undefined: upper GPD tail with xi >= 1")
        total += (1.0 - p_hi) * (v[-1] + p.upper.beta / (1.0 - p.upper.xi))
    else:
        total += (1.0 - p_hi) * v[-1]
    return total


# ---------------------------------------------------------------------------
# Fitting
# ---------------------------------------------------------------------------

def fit_mle(samples, family: str) -> FamilyParams:
    """Maximum-likelihood fit of ``family`` to ``samples``.

    Gaussian uses the closed form (sample mean, 1/n standard deviation,
    i.e. the likelihood stationary point).  Student-t maximizes the mean
    log-likelihood numerically over (mu, log sigma, log nu) and requires
    the gradient norm to reach 1e-8.

    Raises
    ------
    InputError
        On degenerate samples (all identical) or too few observations.
    FitConvergenceError
        If the Student-t optimizer stalls; carries the last iterate.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size < 2:
        raise InputError("need at least 2 samples")
    if not np.all(np.isfinite(x)):
        raise InputError("samples must be finite")
    if np.all(x == x[0]):
        raise InputError("degenerate sample: all values identical")

    if family == GAUSSIAN:
        mu = float(np.mean(x))
        sigma = float(np.sqrt(np.mean((x - mu) ** 2)))
        return Gaussian(mu=mu, sigma=sigma)

    if family == STUDENT_T:
        if x.size < 4:
            raise InputError("student_t fit needs at least 4 samples")
        return _fit_student_t(x)

    raise InputError(f"fit_mle supports {GAUSSIAN!r} and {STUDENT_T!r}, got {family!r}")


def _student_t_negloglik(theta: np.ndarray, x: np.ndarray):
    """Mean negative log-likelihood and gradient in (mu, log s, log nu)."""
    mu, log_s, log_nu = theta
    s, nu = math.exp(log_s), math.exp(log_nu)
    z = (x - mu) / s
    z2 = z * z
    ll = (
        special.gammaln((nu + 1.0) / 2.0)
        - special.gammaln(nu / 2.0)
        - 0.5 * math.log(nu * math.pi)
        - log_s
        - (nu + 1.0) / 2.0 * np.log1p(z2 / nu)
    )
    denom = nu + z2
    d_mu = (nu + 1.0) * z / (s * denom)
    d_log_s = nu * (z2 - 1.0) / denom
    d_log_nu = 0.5 * nu * (
        special.digamma((nu + 1.0) / 2.0)
        - special.digamma(nu / 2.0)
        - 1.0 / nu
        - np.log1p(z2 / nu)
        + (nu + 1.0) * z2 / (nu * denom)
    )
    grad = -np.array([np.mean(d_mu), np.mean(d_log_s), np.mean(d_log_nu)])
    return -float(np.mean(ll)), grad


def _fit_student_t(x: np.ndarray, grad_tol: float = 1e-8, max_iter: int = 500) -> StudentT:
    mu0 = float(np.median(x))
    s0 = max(float(np.std(x)) * 0.8, 1e-6)
    theta0 = np.array([mu0, math.log(s0), math.log(5.0)])
    res = optimize.minimize(
        _student_t_negloglik,
        theta0,
        args=(x,),
        jac=True,
        method="BFGS",
        options={"gtol": 1e-12, "maxiter": max_iter},
    )
    theta = res.x
    _, grad = _student_t_negloglik(theta, x)
    # polish with damped Newton steps if BFGS stopped short of the target
    for _ in range(30):
        if np.linalg.norm(grad) <= grad_tol:
            break
        hess = _numeric_hessian(lambda t: _student_t_negloglik(t, x)[1], theta)
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            break
        theta = theta - step
        _, grad = _student_t_negloglik(theta, x)
    if np.linalg.norm(grad) > grad_tol:
        raise FitConvergenceError(
            f"student_t MLE did not reach gradient norm {grad_tol:g} "
            f"(final {np.linalg.norm(grad):.3g})",
            last_iterate=StudentT(float(theta[0]), math.exp(theta[1]), math.exp(theta[2])),
        )
    return StudentT(mu=float(theta[0]), sigma=math.exp(theta[1]), nu=math.exp(theta[2]))


def _numeric_hessian(grad_fn, theta: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    n = theta.size
    hess = np.empty((n, n))
    for i in range(n):
        step = np.zeros(n)
        step[i] = eps
        hess[:, i] = (grad_fn(theta + step) - grad_fn(theta - step)) / (2.0 * eps)
    return 0.5 * (hess + hess.T)


def empirical_cdf(samples) -> EmpiricalInterpolant:
    """Interpolant reproducing the empirical step CDF at the sample points.

    Breakpoints are ``(count(samples <= v) / M, v)`` over the distinct
    sorted values, so ``cdf`` evaluated at any sample point equals the
    step function exactly and is 0 below the smallest sample.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError("need at least 1 sample")
    if not np.all(np.isfinite(x)):
        raise InputError("samples must be finite")
    values, counts = np.unique(x, return_counts=True)
    probs = np.cumsum(counts) / x.size
    return EmpiricalInterpolant(probs=probs, values=values)


def fit_gpd_tail(source, side: str, attach_prob: float) -> GPDTail:
    """Fit a GPD tail beyond the attach point.

    ``source`` is either a 1-d sample array (exceedance maximum
    likelihood; needs >= 10 exceedances) or an
    :class:`EmpiricalInterpolant` / ``(levels, values)`` quantile grid
    (least squares on the >= 2 grid quantiles beyond ``attach_prob``).
    Lower tails are fit on negated exceedances so both sides share one
    code path.
    """
    if side not in ("lower", "upper"):
        raise InputError(f"side must be 'lower' or 'upper', got {side!r}")
    if not 0.0 < attach_prob < 1.0:
        raise InputError("attach_prob must lie in (0, 1)")

    if isinstance(source, EmpiricalInterpolant):
        grid = (source.probs, source.values)
        return _fit_gpd_from_grid(grid, side, attach_prob)
    if isinstance(source, tuple) and len(source) == 2:
        return _fit_gpd_from_grid(source, side, attach_prob)

    x = np.asarray(source, dtype=float)
    if x.ndim != 1:
        raise InputError("samples must be a 1-d sequence")
    u = inf_quantile(x, attach_prob)
    if side == "upper":
        exceed = x[x > u] - u
    else:
        exceed = u - x[x < u]
    if exceed.size < 10:
        raise InputError(
            f"insufficient tail data: {exceed.size} exceedances beyond the "
            f"attach point (need >= 10)"
        )
    xi, _, beta = stats.genpareto.fit(exceed, floc=0.0)
    return GPDTail(xi=float(xi), beta=float(beta), attach_prob=attach_prob)


def _fit_gpd_from_grid(grid, side: str, attach_prob: float) -> GPDTail:
    levels = np.asarray(grid[0], dtype=float)
    values = np.asarray(grid[1], dtype=float)
    if side == "upper":
        sel = levels > attach_prob + 1e-12
        frac = (1.0 - levels[sel]) / (1.0 - attach_prob)
    else:
        sel = levels < attach_prob - 1e-12
        frac = levels[sel] / attach_prob
    if np.count_nonzero(sel) < 2:
        raise InputError(
            "insufficient tail data: need >= 2 grid levels beyond the attach point"
        )
    if not (levels[0] - 1e-12 <= attach_prob <= levels[-1] + 1e-12):
        raise InputError("attach_prob outside the quantile grid")
    v0 = float(np.interp(attach_prob, levels, values))
    excess = values[sel] - v0 if side == "upper" else v0 - values[sel]

    def residuals(theta):
        xi, log_beta = theta
        return _gpd_tail_excess_quantile(xi, math.exp(log_beta), frac) - excess

    beta0 = max(float(np.max(excess)) / max(-math.log(float(np.min(frac))), 1e-6), 1e-6)
    fit = optimize.least_squares(
        residuals, x0=np.array([0.1, math.log(beta0)]), method="lm", max_nfev=2000
    )
    if not fit.success:
        raise FitConvergenceError(
            f"GPD grid fit did not converge: {fit.message}",
            last_iterate=(float(fit.x[0]), math.exp(float(fit.x[1]))),
        )
    return GPDTail(xi=float(fit.x[0]), beta=math.exp(float(fit.x[1])), attach_prob=attach_prob)


# ---------------------------------------------------------------------------
# Shared empirical quantile
# ---------------------------------------------------------------------------

def inf_quantile(values, q, weights=None):
    """The inf-based empirical quantile inf{y : F_hat(y) >= q}.

    This is the single quantile definition used throughout the package
    (no interpolating estimators).  Supports weighted samples; ``q`` may
    be a scalar or an array.
    """
    x = np.asarray(values, dtype=float)
    if x.size == 0:
        raise InputError("empty sample")
    qs, scalar = _as_array(q)
    if np.any(qs <= 0.0) or np.any(qs > 1.0):
        raise InputError("quantile levels must lie in (0, 1]")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if weights is None:
        cum = np.arange(1, x.size + 1, dtype=float) / x.size
    else:
        w = np.asarray(weights, dtype=float)[order]
        cum = np.cumsum(w)
        cum = cum / cum[-1]
    idx = np.searchsorted(cum, qs - 1e-9, side="left")
    idx = np.minimum(idx, x.size - 1)
    out = xs[idx]
    return _ret(out, scalar)
