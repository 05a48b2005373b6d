"""Conversions between the four forecast forms.

Downward conversions (trajectory -> quantile/parametric/point,
parametric -> quantile/point, quantile -> point) need nothing beyond
the forecast itself.  Upward conversions require structural inputs and
say so loudly: copulas for temporal dependence, distributional families
or tail models for quantile grids, calibration data for point
forecasts.  Whenever an assumption is silently influential (clipped
tail draws, endpoint mass in a quantile mean) a warning is emitted.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from fforms import dists
from fforms.copulas import CopulaSpec, sample_copula
from fforms.core import (
    CalibrationSet,
    ParametricForecast,
    PathwiseBand,
    PointForecast,
    QuantileForecast,
    StepIntervals,
    TrajectoryEnsemble,
    rearrange_monotone,
)
from fforms.errors import InputError, MissingAssumptionError, UnsupportedError


class TailAssumptionWarning(UserWarning):
    """A tail assumption (clipping or endpoint extension) was imposed."""


@dataclass(frozen=True)
class ConformalConfig:
    """Settings for split-conformal calibration of point forecasts."""

    alpha: float
    mode: str = "per_step"  # or "pathwise_sup_norm"
    scale_weights: np.ndarray | None = None

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise InputError("alpha must lie in (0, 1)")
        if self.mode not in ("per_step", "pathwise_sup_norm"):
            raise InputError(f"unknown conformal mode {self.mode!r}")
        if self.scale_weights is not None:
            w = np.asarray(self.scale_weights, dtype=float)
            if np.any(w <= 0.0):
                raise InputError("scale weights must be strictly positive")
            object.__setattr__(self, "scale_weights", w)


@dataclass(frozen=True)
class GPDTailSettings:
    """Where to attach GPD tails when reconstructing a CDF from a grid.

    ``None`` attach levels default to the third-outermost grid levels,
    leaving two levels on each side as fitting data.
    """

    lower: bool = True
    upper: bool = True
    lower_attach: float | None = None
    upper_attach: float | None = None


# ---------------------------------------------------------------------------
# Downward: from trajectory ensembles (marginalization)
# ---------------------------------------------------------------------------

def traj_to_quantile(ens: TrajectoryEnsemble, levels) -> QuantileForecast:
    """Per-step empirical quantiles at the requested levels.

    Uses the inf-based inverse of the (weighted) empirical CDF; rows are
    monotone-rearranged so the output always validates.
    """
    levels = np.asarray(levels, dtype=float)
    _check_levels(levels)
    w = ens.weights
    h = ens.meta.horizon
    values = np.empty((h, levels.size))
    for k in range(h):
        row = dists.inf_quantile(ens.paths[:, k], levels, weights=w)
        values[k] = rearrange_monotone(np.atleast_1d(row))
    return QuantileForecast(meta=ens.meta, levels=levels, values=values)


def traj_to_parametric(ens: TrajectoryEnsemble, family: str) -> ParametricForecast:
    """Fit ``family`` to each step's ensemble values independently."""
    w = ens.weights
    params = []
    for k in range(ens.meta.horizon):
        col = ens.paths[:, k]
        if family == dists.GAUSSIAN:
            params.append(_gaussian_fit(col, w, step=k))
        elif family == dists.STUDENT_T:
            if w is not None:
                raise UnsupportedError("student_t fitting of weighted ensembles is not supported")
            params.append(dists.fit_mle(col, dists.STUDENT_T))
        elif family == dists.EMPIRICAL:
            params.append(_empirical_fit(col, w))
        else:
            raise InputError(f"unsupported target family {family!r}")
    return ParametricForecast(meta=ens.meta, family=family, params=params)


def _gaussian_fit(col: np.ndarray, w: np.ndarray | None, step: int) -> dists.Gaussian:
    if w is None:
        if np.all(col == col[0]):
            raise InputError(f"degenerate sample: all values identical at step {step}")
        return dists.fit_mle(col, dists.GAUSSIAN)
    mu = float(np.average(col, weights=w))
    var = float(np.average((col - mu) ** 2, weights=w))
    if var <= 0.0:
        raise InputError(f"degenerate sample: zero variance at step {step}")
    return dists.Gaussian(mu=mu, sigma=math.sqrt(var))


def _empirical_fit(col: np.ndarray, w: np.ndarray | None) -> dists.EmpiricalInterpolant:
    if w is None:
        return dists.empirical_cdf(col)
    order = np.argsort(col, kind="stable")
    sorted_vals = col[order]
    cum = np.cumsum(np.asarray(w, dtype=float)[order])
    cum /= cum[-1]
    values, last_idx = np.unique(sorted_vals, return_index=True)
    # take the cumulative weight at the *last* occurrence of each value
    idx = np.append(last_idx[1:], sorted_vals.size) - 1
    return dists.EmpiricalInterpolant(probs=cum[idx], values=values)


def traj_to_point(ens: TrajectoryEnsemble, statistic: str = "mean") -> PointForecast:
    """Summarize each step with its weighted mean or inf-based median."""
    w = ens.effective_weights()
    if statistic == "mean":
        vals = np.average(ens.paths, axis=0, weights=w)
    elif statistic == "median":
        vals = np.array(
            [dists.inf_quantile(ens.paths[:, k], 0.5, weights=w) for k in range(ens.meta.horizon)]
        )
    else:
        raise InputError(f"statistic must be 'mean' or 'median', got {statistic!r}")
    return PointForecast(meta=ens.meta, values=vals)


# ---------------------------------------------------------------------------
# Lateral: from parametric forecasts
# ---------------------------------------------------------------------------

def parametric_to_quantile(f: ParametricForecast, levels) -> QuantileForecast:
    """Invert each marginal CDF at the requested levels."""
    levels = np.asarray(levels, dtype=float)
    _check_levels(levels)
    values = np.vstack([dists.quantile(p, levels) for p in f.params])
    return QuantileForecast(meta=f.meta, levels=levels, values=values)


def parametric_to_point(f: ParametricForecast, statistic: str = "mean") -> PointForecast:
    """Extract the per-step mean or median."""
    if statistic == "mean":
        vals = np.array([dists.mean(p) for p in f.params])
    elif statistic == "median":
        vals = np.array([dists.quantile(p, 0.5) for p in f.params])
    else:
        raise InputError(f"statistic must be 'mean' or 'median', got {statistic!r}")
    return PointForecast(meta=f.meta, values=vals)


# ---------------------------------------------------------------------------
# Upward: marginals + copula -> trajectories
# ---------------------------------------------------------------------------

def marginals_to_trajectory(
    f: ParametricForecast | QuantileForecast,
    copula: CopulaSpec,
    n_paths: int,
    seed: int,
    *,
    tails: GPDTailSettings | None = None,
    strict_tails: bool = False,
) -> TrajectoryEnsemble:
    """Sample joint paths with the given marginals and copula dependence.

    Quantile inputs are first lifted to interpolated CDFs (optionally
    with GPD tails).  Copula draws falling outside an interpolant's grid
    are clipped to it and reported via :class:`TailAssumptionWarning`,
    or rejected outright when ``strict_tails`` is set.
    """
    if isinstance(f, QuantileForecast):
        f = quantile_to_interpolated_cdf(f, tails=tails)
    if not isinstance(f, ParametricForecast):
        raise UnsupportedError(
            f"cannot lift a {type(f).__name__} to trajectories; need marginal distributions"
        )
    h = f.meta.horizon
    u = sample_copula(copula, n_paths, h, seed)
    paths = np.empty((n_paths, h))
    clipped = 0
    for k, params in enumerate(f.params):
        col, n_clip = _transform_column(params, u[:, k])
        clipped += n_clip
        paths[:, k] = col
    if clipped:
        if strict_tails:
            raise MissingAssumptionError(
                f"{clipped} copula draws fell outside the interpolated grid and "
                "no tail model is attached; supply GPD tails or drop --strict-tails"
            )
        warnings.warn(
            f"clipped {clipped} of {n_paths * h} copula draws to the quantile grid "
            "(no tail model attached)",
            TailAssumptionWarning,
            stacklevel=2,
        )
    return TrajectoryEnsemble(meta=f.meta, paths=paths)


_CLIP_EPS = 1e-9


def _transform_column(params, u: np.ndarray) -> tuple[np.ndarray, int]:
    if isinstance(params, dists.EmpiricalInterpolant):
        lo, hi = params.probs[0], params.probs[-1]
        clipped = int(np.count_nonzero((u < lo) | (u > hi)))
        u = np.clip(u, lo + _CLIP_EPS, hi - _CLIP_EPS)
        return dists.quantile(params, u), clipped
    if isinstance(params, dists.SplicedGPDTails):
        lo = params.body.probs[0] if params.lower is None else 0.0
        hi = params.body.probs[-1] if params.upper is None else 1.0
        clipped = int(np.count_nonzero((u < lo) | (u > hi)))
        if clipped:
            u = np.clip(u, lo + _CLIP_EPS, hi - _CLIP_EPS)
        return dists.quantile(params, u), clipped
    return dists.quantile(params, u), 0


# ---------------------------------------------------------------------------
# From quantile forecasts: distribution reconstruction
# ---------------------------------------------------------------------------

def quantile_to_parametric_moment_match(
    f: QuantileForecast, level_pair: tuple[float, float], family: str = dists.GAUSSIAN
) -> ParametricForecast:
    """Closed-form Gaussian reconstruction from two quantile levels.

    Inverts Q(q) = mu + sigma * z_q at the two levels.  A repeated level
    cannot identify two parameters and is rejected as underdetermined.
    """
    if family != dists.GAUSSIAN:
        raise UnsupportedError("moment matching is implemented for the gaussian family")
    q1, q2 = level_pair
    if q1 == q2:
        raise InputError(
            "underdetermined: a single quantile level cannot identify two parameters"
        )
    i1, i2 = _level_index(f.levels, q1), _level_index(f.levels, q2)
    z1, z2 = stats.norm.ppf(q1), stats.norm.ppf(q2)
    params = []
    for k in range(f.meta.horizon):
        v1, v2 = f.values[k, i1], f.values[k, i2]
        if (v2 - v1) * (q2 - q1) <= 0.0:
            raise InputError(f"non-increasing quantiles at step {k}")
        mu = (v2 * z1 - v1 * z2) / (z1 - z2)
        sigma = (v2 - v1) / (z2 - z1)
        params.append(dists.Gaussian(mu=float(mu), sigma=float(sigma)))
    return ParametricForecast(meta=f.meta, family=dists.GAUSSIAN, params=params)


def quantile_to_parametric_regression(
    f: QuantileForecast,
    family: str = dists.GAUSSIAN,
    weight_mode: str = "equal",
    iterations: int = 3,
) -> tuple[ParametricForecast, np.ndarray]:
    """Fit a family per step by weighted least squares on the quantile grid.

    Minimizes sum_l w_l (Q_theta(q_l) - Q(q_l))^2.  ``weight_mode``
    "equal" fits once with unit weights; "asymptotic" refits
    ``iterations`` times with w_l proportional to
    f_theta(Q_theta(q_l))^2 / (q_l (1 - q_l)).  Returns the fitted
    forecast and the final objective value per step.
    """
    if weight_mode not in ("equal", "asymptotic"):
        raise InputError(f"unknown weight mode {weight_mode!r}")
    d = {dists.GAUSSIAN: 2, dists.STUDENT_T: 3}.get(family)
    if d is None:
        raise UnsupportedError(f"quantile regression supports gaussian/student_t, got {family!r}")
    levels = f.levels
    if levels.size < d:
        raise InputError(
            f"underdetermined: {levels.size} levels cannot identify a "
            f"{d}-parameter family"
        )
    n_rounds = 1 if weight_mode == "equal" else max(int(iterations), 1)
    params, objectives = [], np.empty(f.meta.horizon)
    for k in range(f.meta.horizon):
        target = f.values[k]
        w = np.ones_like(levels)
        for _ in range(n_rounds):
            theta = _fit_quantile_curve(levels, target, w, family)
            if weight_mode == "asymptotic":
                w = _asymptotic_weights(theta, levels)
        resid = dists.quantile(theta, levels) - target
        objectives[k] = float(np.sum(w * resid**2))
        params.append(theta)
    return ParametricForecast(meta=f.meta, family=family, params=params), objectives


def _fit_quantile_curve(levels, target, w, family):
    sw = np.sqrt(w)
    if family == dists.GAUSSIAN:
        z = stats.norm.ppf(levels)
        design = np.column_stack([np.ones_like(z), z]) * sw[:, None]
        coef, *_ = np.linalg.lstsq(design, target * sw, rcond=None)
        mu, sigma = float(coef[0]), float(coef[1])
        if sigma <= 0.0:
            raise InputError("non-increasing quantiles: fitted scale is not positive")
        return dists.Gaussian(mu=mu, sigma=sigma)

    # student_t: nonlinear in nu
    mu0 = float(np.interp(0.5, levels, target))
    iqr = float(np.interp(0.75, levels, target) - np.interp(0.25, levels, target))
    sigma0 = max(iqr / 1.35, 1e-6)

    def residuals(theta):
        mu, sigma, nu = theta
        return np.sqrt(w) * (mu + sigma * stats.t.ppf(levels, df=nu) - target)

    fit = optimize.least_squares(
        residuals,
        x0=np.array([mu0, sigma0, 5.0]),
        bounds=([-np.inf, 1e-10, 0.1], [np.inf, np.inf, 1e6]),
        max_nfev=5000,
    )
    if not fit.success:
        raise InputError(f"quantile regression did not converge: {fit.message}")
    return dists.StudentT(mu=float(fit.x[0]), sigma=float(fit.x[1]), nu=float(fit.x[2]))


def _asymptotic_weights(theta, levels) -> np.ndarray:
    q_vals = dists.quantile(theta, levels)
    dens = dists.density(theta, q_vals)
    w = dens**2 / (levels * (1.0 - levels))
    total = np.sum(w)
    if not np.isfinite(total) or total <= 0.0:
        return np.ones_like(levels)
    return w * levels.size / total


def quantile_to_interpolated_cdf(
    f: QuantileForecast, tails: GPDTailSettings | None = None
) -> ParametricForecast:
    """Monotone piecewise-linear CDF through each step's quantile grid.

    With ``tails``, GPD tails are fitted to the outermost grid levels by
    least squares and spliced continuously at the attach levels; without
    them, queries beyond the grid raise.  Crossing quantiles are an
    error; callers may rearrange first.
    """
    levels = f.levels
    if levels.size < 2:
        raise InputError("need at least 2 quantile levels to interpolate")
    _check_levels(levels)
    params = []
    for k in range(f.meta.horizon):
        row = f.values[k]
        if np.any(np.diff(row) < 0.0):
            raise InputError(f"crossing quantiles at step {k}; rearrange first")
        if tails is None:
            params.append(dists.EmpiricalInterpolant(probs=levels, values=row))
        else:
            params.append(_spliced_from_grid(levels, row, tails))
    family = dists.EMPIRICAL if tails is None else dists.SPLICED_GPD
    return ParametricForecast(meta=f.meta, family=family, params=params)


def _spliced_from_grid(levels, row, settings: GPDTailSettings) -> dists.SplicedGPDTails:
    lower_attach = settings.lower_attach if settings.lower else None
    upper_attach = settings.upper_attach if settings.upper else None
    if settings.lower and lower_attach is None:
        if levels.size < 4:
            raise InputError("need >= 4 grid levels for default GPD attach points")
        lower_attach = float(levels[2])
    if settings.upper and upper_attach is None:
        if levels.size < 4:
            raise InputError("need >= 4 grid levels for default GPD attach points")
        upper_attach = float(levels[-3])

    lower = upper = None
    lo_idx, hi_idx = 0, levels.size - 1
    if settings.lower:
        lower = dists.fit_gpd_tail((levels, row), side="lower", attach_prob=lower_attach)
        lo_idx = int(np.searchsorted(levels, lower_attach - 1e-12, side="left"))
    if settings.upper:
        upper = dists.fit_gpd_tail((levels, row), side="upper", attach_prob=upper_attach)
        hi_idx = int(np.searchsorted(levels, upper_attach + 1e-12, side="right")) - 1
    if hi_idx < lo_idx:
        raise InputError("attach levels leave no body between the tails")
    body = dists.EmpiricalInterpolant(
        probs=levels[lo_idx : hi_idx + 1], values=row[lo_idx : hi_idx + 1]
    )
    return dists.SplicedGPDTails(body=body, lower=lower, upper=upper)


def quantile_to_point(
    f: QuantileForecast, statistic: str = "median", tails: GPDTailSettings | None = None
) -> PointForecast:
    """Median by grid interpolation, or mean by integrating the grid.

    The mean uses the trapezoidal rule on the quantile function.  The
    mass outside the grid is covered either by fitted GPD tails (when
    ``tails`` is given) or by nearest-endpoint extension, in which case
    a :class:`TailAssumptionWarning` is attached.
    """
    levels, h = f.levels, f.meta.horizon
    if statistic == "median":
        if not levels[0] <= 0.5 <= levels[-1]:
            raise InputError(
                f"median lies outside the level hull [{levels[0]}, {levels[-1]}]"
            )
        vals = np.array([np.interp(0.5, levels, f.values[k]) for k in range(h)])
        return PointForecast(meta=f.meta, values=vals)
    if statistic != "mean":
        raise InputError(f"statistic must be 'mean' or 'median', got {statistic!r}")
    if levels.size < 2:
        raise InputError("mean integration needs at least 2 levels")
    if tails is not None:
        lifted = quantile_to_interpolated_cdf(f, tails=tails)
        return parametric_to_point(lifted, statistic="mean")
    dq = np.diff(levels)
    vals = np.empty(h)
    for k in range(h):
        row = f.values[k]
        body = float(np.sum((row[:-1] + row[1:]) / 2.0 * dq))
        vals[k] = levels[0] * row[0] + body + (1.0 - levels[-1]) * row[-1]
    warnings.warn(
        f"quantile mean: mass outside the grid ({levels[0]:.3g} below, "
        f"{1.0 - levels[-1]:.3g} above) approximated by nearest-endpoint extension",
        TailAssumptionWarning,
        stacklevel=2,
    )
    return PointForecast(meta=f.meta, values=vals)


# ---------------------------------------------------------------------------
# From point forecasts: conformal calibration and residual bootstrap
# ---------------------------------------------------------------------------

def conformal_rank(n: int, alpha: float) -> int:
    """Order-statistic rank ceil((n+1)(1-alpha)) with finite-sample validity."""
    rank = math.ceil((n + 1) * (1.0 - alpha) - 1e-9)
    if rank > n:
        raise InputError(
            f"insufficient calibration records: rank {rank} exceeds n = {n} "
            f"at alpha = {alpha}"
        )
    return max(rank, 1)


def _calibration_residuals(f: PointForecast, cal: CalibrationSet) -> np.ndarray:
    h = f.meta.horizon
    rows = []
    for i, (fc, real) in enumerate(cal.records):
        if not isinstance(fc, PointForecast):
            raise InputError(f"calibration record {i} is not a point forecast")
        if fc.meta.horizon != h:
            raise InputError(
                f"calibration record {i} horizon {fc.meta.horizon} != forecast horizon {h}"
            )
        rows.append(real - fc.values)
    if not rows:
        raise InputError("calibration set is empty")
    return np.vstack(rows)


def point_to_intervals_conformal(
    f: PointForecast, cal: CalibrationSet, cfg: ConformalConfig
) -> StepIntervals:
    """Split-conformal per-step intervals around a point forecast."""
    if cfg.mode != "per_step":
        raise InputError("use point_to_band_conformal_pathwise for pathwise mode")
    resid = np.abs(_calibration_residuals(f, cal))
    rank = conformal_rank(resid.shape[0], cfg.alpha)
    q = np.sort(resid, axis=0)[rank - 1]
    return StepIntervals(
        lower=f.values - q,
        upper=f.values + q,
        alpha=cfg.alpha,
        provenance={
            "method": "split_conformal_per_step",
            "n_calibration": int(resid.shape[0]),
            "rank": rank,
        },
    )


def point_to_band_conformal_pathwise(
    f: PointForecast, cal: CalibrationSet, cfg: ConformalConfig
) -> PathwiseBand:
    """Simultaneous band from sup-norm conformal scores.

    Scores are s_i = max_k |r_i^(k)| / w_k with w_k the per-step median
    absolute residual unless supplied; the multiplier is the
    ceil((n+1)(1-alpha))-th smallest score.
    """
    if cfg.mode != "pathwise_sup_norm":
        raise InputError("use point_to_intervals_conformal for per-step mode")
    resid = np.abs(_calibration_residuals(f, cal))
    n = resid.shape[0]
    if cfg.scale_weights is not None:
        w = np.asarray(cfg.scale_weights, dtype=float)
        if w.size != f.meta.horizon:
            raise InputError("scale weights length must equal the horizon")
    else:
        w = np.maximum(np.median(resid, axis=0), 1e-12)
    scores = np.max(resid / w, axis=1)
    rank = conformal_rank(n, cfg.alpha)
    c = float(np.sort(scores)[rank - 1])
    return PathwiseBand(
        center=f.values,
        scale=w,
        multiplier=c,
        provenance={
            "method": "split_conformal_pathwise_sup_norm",
            "n_calibration": n,
            "rank": rank,
            "alpha": cfg.alpha,
        },
    )


def point_to_trajectory_bootstrap(
    f: PointForecast,
    cal: CalibrationSet,
    n_paths: int,
    seed: int,
    stratify: str = "rows",
) -> TrajectoryEnsemble:
    """Pseudo-trajectories from resampled calibration residuals.

    ``stratify="rows"`` (default) resamples whole residual rows,
    preserving within-window dependence; ``"by_lead"`` resamples each
    lead's pool independently; ``"pooled"`` ignores lead structure.
    """
    resid = _calibration_residuals(f, cal)
    rng = np.random.default_rng(seed)
    n, h = resid.shape
    if stratify == "rows":
        idx = rng.integers(0, n, size=n_paths)
        noise = resid[idx]
    elif stratify == "by_lead":
        cols = [resid[rng.integers(0, n, size=n_paths), k] for k in range(h)]
        noise = np.column_stack(cols)
    elif stratify == "pooled":
        pool = resid.ravel()
        noise = pool[rng.integers(0, pool.size, size=(n_paths, h))]
    else:
        raise InputError(f"stratify must be 'rows', 'by_lead' or 'pooled', got {stratify!r}")
    return TrajectoryEnsemble(meta=f.meta, paths=f.values + noise)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------

def _check_levels(levels: np.ndarray) -> None:
    if levels.ndim != 1 or levels.size < 1:
        raise InputError("levels must be a non-empty 1-d sequence")
    if np.any(levels <= 0.0) or np.any(levels >= 1.0):
        raise InputError("levels must lie in the open interval (0, 1)")
    if np.any(np.diff(levels) <= 0.0):
        raise InputError("levels must be strictly ascending")


def _level_index(levels: np.ndarray, q: float) -> int:
    idx = np.nonzero(np.isclose(levels, q, atol=1e-12))[0]
    if idx.size == 0:
        raise InputError(f"level {q} is not on the forecast grid")
    return int(idx[0])
