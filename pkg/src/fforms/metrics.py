"""Task-aligned forecast evaluation.

Point accuracy (MAE/MSE/MASE), marginal proper scores (pinball, WIS,
CRPS, log score), path-dependent scores (energy, variogram), event
scores (Brier, integrated Brier) and calibration diagnostics (PIT,
reliability, coverage).  Marginal scores cannot see temporal
dependence; the energy and variogram scores exist precisely to catch
ensembles with accurate marginals but misspecified joint structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, stats

from fforms import dists
from fforms.core import (
    ForecastDocument,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
)
from fforms.errors import InputError, UnsupportedError


class EvaluationBatch:
    """Paired (forecast, realization) records with a common horizon."""

    def __init__(self, records):
        recs = []
        horizon = None
        for i, (forecast, realization) in enumerate(records):
            real = np.asarray(realization, dtype=float)
            if real.ndim != 1 or real.size != forecast.meta.horizon:
                raise InputError(
                    f"record {i}: realization length {real.size} != horizon "
                    f"{forecast.meta.horizon}"
                )
            if horizon is None:
                horizon = forecast.meta.horizon
            elif forecast.meta.horizon != horizon:
                raise InputError(f"record {i}: inconsistent horizon within batch")
            recs.append((forecast, real))
        if not recs:
            raise InputError("evaluation batch is empty")
        self.records = tuple(recs)
        self.horizon = horizon

    @property
    def n(self) -> int:
        return len(self.records)


# ---------------------------------------------------------------------------
# Point metrics
# ---------------------------------------------------------------------------

def point_errors(batch: EvaluationBatch, training_series=None) -> dict:
    """MAE, MSE and (when a training series is given) MASE.

    MASE scales MAE by the in-sample one-step naive MAE of the training
    series, (1/(n-1)) * sum |y_t - y_{t-1}|.
    """
    errs = []
    for forecast, real in batch.records:
        if not isinstance(forecast, PointForecast):
            raise UnsupportedError("point_errors expects point forecasts")
        errs.append(real - forecast.values)
    e = np.concatenate(errs)
    out = {"mae": float(np.mean(np.abs(e))), "mse": float(np.mean(e**2))}
    if training_series is not None:
        y = np.asarray(getattr(training_series, "values", training_series), dtype=float)
        if y.size < 2:
            raise InputError("MASE needs a training series of length >= 2")
        naive = float(np.mean(np.abs(np.diff(y))))
        if naive == 0.0:
            raise InputError("zero naive error: constant training series")
        out["mase"] = out["mae"] / naive
    return out


# ---------------------------------------------------------------------------
# Marginal proper scores
# ---------------------------------------------------------------------------

def pinball(q_value, y, level: float):
    """Pinball loss in its non-negative form max(q(y-Q), (q-1)(y-Q)).

    Zero exactly when y equals the predicted quantile; at level 0.5 it
    is half the absolute error.
    """
    if not 0.0 < level < 1.0:
        raise InputError("quantile level must lie in (0, 1)")
    diff = np.asarray(y, dtype=float) - np.asarray(q_value, dtype=float)
    out = np.maximum(level * diff, (level - 1.0) * diff)
    return float(out) if out.ndim == 0 else out


def wis(f: QuantileForecast, realization) -> float:
    """Mean pinball loss over all steps and levels of the grid."""
    real = np.asarray(realization, dtype=float)
    if real.size != f.meta.horizon:
        raise InputError("realization length does not match horizon")
    total = 0.0
    for k in range(f.meta.horizon):
        for j, q in enumerate(f.levels):
            total += pinball(f.values[k, j], real[k], float(q))
    return total / (f.meta.horizon * f.levels.size)


@dataclass(frozen=True)
class CRPSResult:
    """Per-step CRPS values, their mean, and how they were computed."""

    per_step: np.ndarray
    mean: float
    method: str
    approximate: bool = False


def crps(forecast: ForecastDocument, realization) -> CRPSResult:
    """Continuous ranked probability score per step.

    Gaussian marginals use the closed form; ensembles use the paired
    estimator E|X - y| - (1/2) E|X - X'|; interpolants integrate the
    squared CDF error exactly; Student-t and spliced families integrate
    it numerically.  Quantile grids get the pinball-integral
    approximation and are flagged ``approximate``.
    """
    real = np.asarray(realization, dtype=float)
    if real.size != forecast.meta.horizon:
        raise InputError("realization length does not match horizon")

    if isinstance(forecast, TrajectoryEnsemble):
        per = np.array([
            crps_ensemble(forecast.paths[:, k], real[k], weights=forecast.weights)
            for k in range(forecast.meta.horizon)
        ])
        return CRPSResult(per, float(np.mean(per)), "ensemble")

    if isinstance(forecast, ParametricForecast):
        per = np.empty(forecast.meta.horizon)
        for k, params in enumerate(forecast.params):
            per[k] = _crps_marginal(params, real[k])
        return CRPSResult(per, float(np.mean(per)), forecast.family)

    if isinstance(forecast, QuantileForecast):
        levels = forecast.levels
        if levels.size < 2:
            raise InputError("quantile CRPS needs at least 2 levels")
        du = np.empty(levels.size)
        du[0] = (levels[1] - levels[0]) / 2.0
        du[-1] = (levels[-1] - levels[-2]) / 2.0
        if levels.size > 2:
            du[1:-1] = (levels[2:] - levels[:-2]) / 2.0
        per = np.empty(forecast.meta.horizon)
        for k in range(forecast.meta.horizon):
            losses = np.array([
                pinball(forecast.values[k, j], real[k], float(levels[j]))
                for j in range(levels.size)
            ])
            per[k] = 2.0 * float(np.sum(du * losses))
        return CRPSResult(per, float(np.mean(per)), "quantile_pinball", approximate=True)

    raise UnsupportedError("CRPS is undefined for point forecasts; use MAE")


def crps_gaussian(mu: float, sigma: float, y: float) -> float:
    """Closed form sigma * (z(2 Phi(z) - 1) + 2 phi(z) - 1/sqrt(pi))."""
    z = (y - mu) / sigma
    return float(
        sigma * (z * (2.0 * stats.norm.cdf(z) - 1.0) + 2.0 * stats.norm.pdf(z)
                 - 1.0 / math.sqrt(math.pi))
    )


def crps_ensemble(samples, y: float, weights=None) -> float:
    """Paired-sum ensemble CRPS, computed in O(M log M) via sorting."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InputError("empty ensemble")
    if weights is None:
        w = np.full(x.size, 1.0 / x.size)
    else:
        w = np.asarray(weights, dtype=float)
        w = w / np.sum(w)
    order = np.argsort(x, kind="stable")
    xs, ws = x[order], w[order]
    term1 = float(np.sum(ws * np.abs(xs - y)))
    cw = np.concatenate([[0.0], np.cumsum(ws)])[:-1]
    cwx = np.concatenate([[0.0], np.cumsum(ws * xs)])[:-1]
    pair = 2.0 * float(np.sum(ws * (xs * cw - cwx)))
    return term1 - 0.5 * pair


def _crps_marginal(params, y: float) -> float:
    dists.require_valid(params)
    if isinstance(params, dists.Gaussian):
        return crps_gaussian(params.mu, params.sigma, y)
    if isinstance(params, dists.EmpiricalInterpolant):
        return _crps_interpolant(params, y)
    if isinstance(params, dists.StudentT):
        if params.nu <= 1.0:
            raise InputError("CRPS is infinite for student_t with nu <= 1")
        return _crps_quadrature(params, y)
    if isinstance(params, dists.SplicedGPDTails):
        for tail in (params.lower, params.upper):
            if tail is not None and tail.xi >= 1.0:
                raise InputError("CRPS is infinite for GPD tails with xi >= 1")
        return _crps_quadrature(params, y)
    raise UnsupportedError(f"CRPS not implemented for {type(params).__name__}")


def _crps_interpolant(p: dists.EmpiricalInterpolant, y: float) -> float:
    """Exact integral of (F(x) - 1{y <= x})^2 for a piecewise-linear F."""
    v, pr = p.values, p.probs
    total = 0.0
    if y < v[0]:
        total += v[0] - y
    if y > v[-1]:
        total += y - v[-1]

    def seg(a, b, pa, pb, shift):
        # integral of (F(x) - shift)^2 on [a, b], F linear from pa to pb
        if b <= a:
            return 0.0
        s = (pb - pa) / (b - a)
        if s == 0.0:
            return (pa - shift) ** 2 * (b - a)
        return (((pb - shift) ** 3) - ((pa - shift) ** 3)) / (3.0 * s)

    for i in range(v.size - 1):
        a, b, pa, pb = v[i], v[i + 1], pr[i], pr[i + 1]
        if b == a:
            continue
        if y <= a:
            total += seg(a, b, pa, pb, 1.0)
        elif y >= b:
            total += seg(a, b, pa, pb, 0.0)
        else:
            py = pa + (pb - pa) * (y - a) / (b - a)
            total += seg(a, y, pa, py, 0.0) + seg(y, b, py, pb, 1.0)
    return total


def _crps_quadrature(params, y: float) -> float:
    def integrand(x):
        f = dists.cdf(params, x)
        return (f - (1.0 if x >= y else 0.0)) ** 2

    lo = dists.quantile(params, 1e-9) if _has_lower_tail(params) else None
    hi = dists.quantile(params, 1.0 - 1e-9) if _has_upper_tail(params) else None
    if lo is None:
        lo = min(_body_min(params), y)
    if hi is None:
        hi = max(_body_max(params), y)
    a, b = min(lo, y), max(hi, y)
    left, _ = integrate.quad(integrand, a, y, limit=200)
    right, _ = integrate.quad(integrand, y, b, limit=200)
    # tails beyond the quadrature window contribute O(1e-9); include the
    # hard 0/1 regions for distributions without full support
    extra = 0.0
    if y < a:
        extra += a - y
    if y > b:
        extra += y - b
    return left + right + extra


def _has_lower_tail(params) -> bool:
    return not isinstance(params, dists.SplicedGPDTails) or params.lower is not None


def _has_upper_tail(params) -> bool:
    return not isinstance(params, dists.SplicedGPDTails) or params.upper is not None


def _body_min(params) -> float:
    return float(params.body.values[0]) if isinstance(params, dists.SplicedGPDTails) else -np.inf


def _body_max(params) -> float:
    return float(params.body.values[-1]) if isinstance(params, dists.SplicedGPDTails) else np.inf


def log_score(f: ParametricForecast, realization) -> float:
    """Mean negative log predictive density per step (floored at 1e-300)."""
    real = np.asarray(realization, dtype=float)
    if real.size != f.meta.horizon:
        raise InputError("realization length does not match horizon")
    total = 0.0
    for k, params in enumerate(f.params):
        total -= float(dists.log_density(params, real[k]))
    return total / f.meta.horizon


# ---------------------------------------------------------------------------
# Path-dependent scores
# ---------------------------------------------------------------------------

def energy_score(ens: TrajectoryEnsemble, realization) -> float:
    """Energy score with Euclidean norms over the horizon vector.

    At h = 1 this routes through :func:`crps_ensemble`, so the identity
    with the ensemble CRPS holds exactly.
    """
    y = np.asarray(realization, dtype=float)
    if y.size != ens.meta.horizon:
        raise InputError("realization length does not match horizon")
    if ens.meta.horizon == 1:
        return crps_ensemble(ens.paths[:, 0], float(y[0]), weights=ens.weights)
    w = ens.effective_weights()
    x = ens.paths
    term1 = float(np.sum(w * np.linalg.norm(x - y, axis=1)))
    term2 = 0.0
    block = 2048
    for start in range(0, x.shape[0], block):
        xa = x[start : start + block]
        wa = w[start : start + block]
        d = np.sqrt(np.maximum(
            np.sum(xa**2, axis=1)[:, None]
            + np.sum(x**2, axis=1)[None, :]
            - 2.0 * xa @ x.T,
            0.0,
        ))
        term2 += float(wa @ d @ w)
    return term1 - 0.5 * term2


def variogram_score(ens: TrajectoryEnsemble, realization, weights="uniform") -> float:
    """Absolute-difference variogram score summed over step pairs t < t'.

    ``weights`` is "uniform", "inverse_lag" (w = 1/|t - t'|) or an
    explicit (h, h) matrix whose upper triangle is used.
    """
    y = np.asarray(realization, dtype=float)
    h = ens.meta.horizon
    if h < 2:
        raise InputError("variogram needs >= 2 steps")
    if y.size != h:
        raise InputError("realization length does not match horizon")
    if isinstance(weights, str):
        if weights == "uniform":
            wmat = np.ones((h, h))
        elif weights == "inverse_lag":
            lag = np.abs(np.subtract.outer(np.arange(h), np.arange(h)))
            with np.errstate(divide="ignore"):
                wmat = np.where(lag > 0, 1.0 / np.maximum(lag, 1), 0.0)
        else:
            raise InputError(f"unknown weight preset {weights!r}")
    else:
        wmat = np.asarray(weights, dtype=float)
        if wmat.shape != (h, h):
            raise InputError(f"weight matrix must be ({h}, {h})")
    pw = ens.effective_weights()
    obs = np.abs(y[:, None] - y[None, :])
    ens_mean = np.einsum(
        "m,mij->ij", pw, np.abs(ens.paths[:, :, None] - ens.paths[:, None, :])
    )
    iu = np.triu_indices(h, k=1)
    return float(np.sum(wmat[iu] * (obs[iu] - ens_mean[iu]) ** 2))


# ---------------------------------------------------------------------------
# Event scores
# ---------------------------------------------------------------------------

def brier(predictions, outcomes) -> float:
    """Mean squared error of probability forecasts for binary outcomes."""
    p = np.asarray(predictions, dtype=float)
    o = np.asarray(outcomes, dtype=float)
    if p.shape != o.shape:
        raise InputError("predictions and outcomes must have the same shape")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise InputError("predicted probabilities must lie in [0, 1]")
    if not np.all(np.isin(o, (0.0, 1.0))):
        raise InputError("outcomes must be binary")
    return float(np.mean((p - o) ** 2))


def integrated_brier(survival_predictions, hitting_times, horizon: int) -> float:
    """(1/(nh)) sum_i sum_k (S_i(k) - 1{tau_i > k})^2.

    ``survival_predictions`` is an (n, h) array (or objects exposing a
    ``survival`` array); ``hitting_times`` holds integers in 1..h, with
    ``None`` for censored instances (treated as tau > h).
    """
    rows = [np.asarray(getattr(s, "survival", s), dtype=float) for s in survival_predictions]
    s = np.vstack(rows)
    if s.shape[1] != horizon:
        raise InputError(f"survival curves must have length {horizon}")
    if np.any(np.diff(s, axis=1) > 1e-9):
        raise InputError("survival predictions must be non-increasing in k")
    n = s.shape[0]
    if len(hitting_times) != n:
        raise InputError("one hitting time per survival curve required")
    ks = np.arange(1, horizon + 1)
    total = 0.0
    for i, tau in enumerate(hitting_times):
        if tau is None:
            ind = np.ones(horizon)
        else:
            tau = int(tau)
            if not 1 <= tau <= horizon:
                raise InputError(f"hitting time {tau} outside 1..{horizon}")
            ind = (ks < tau).astype(float)
        total += float(np.sum((s[i] - ind) ** 2))
    return total / (n * horizon)


# ---------------------------------------------------------------------------
# Calibration diagnostics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PITResult:
    """PIT values at one step, their KS distance to uniform, and how
    many were clipped at a quantile-grid hull."""

    values: np.ndarray
    ks_distance: float
    n_clipped: int = 0


def pit_values(batch: EvaluationBatch, step: int, seed: int | None = None) -> PITResult:
    """Probability integral transform F(y) at a 1-based horizon step.

    Trajectory forecasts use the randomized PIT (a uniform draw between
    the left and right limits of the empirical CDF), which needs a
    ``seed``.  Quantile forecasts interpolate inside their hull and clip
    (with a count) outside it.
    """
    if not 1 <= step <= batch.horizon:
        raise InputError(f"step must lie in 1..{batch.horizon}")
    k = step - 1
    values = np.empty(batch.n)
    clipped = 0
    rng = None
    for i, (forecast, real) in enumerate(batch.records):
        y = float(real[k])
        if isinstance(forecast, ParametricForecast):
            values[i] = float(dists.cdf(forecast.params[k], y))
        elif isinstance(forecast, TrajectoryEnsemble):
            if rng is None:
                if seed is None:
                    raise InputError("randomized PIT for ensembles needs a seed")
                rng = np.random.default_rng(seed)
            w = forecast.effective_weights()
            col = forecast.paths[:, k]
            left = float(np.sum(w[col < y]))
            right = float(np.sum(w[col <= y]))
            values[i] = left + rng.random() * (right - left)
        elif isinstance(forecast, QuantileForecast):
            levels, row = forecast.levels, forecast.values[k]
            if y < row[0]:
                values[i] = float(levels[0])
                clipped += 1
            elif y > row[-1]:
                values[i] = float(levels[-1])
                clipped += 1
            else:
                values[i] = float(np.interp(y, row, levels))
        else:
            raise UnsupportedError("PIT is undefined for point forecasts")
    ks = ks_statistic(values, lambda x: np.clip(x, 0.0, 1.0))
    return PITResult(values=values, ks_distance=ks, n_clipped=clipped)


def ks_statistic(samples, cdf, weights=None) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``."""
    x = np.asarray(samples, dtype=float)
    if x.size == 0:
        raise InputError("empty sample")
    order = np.argsort(x, kind="stable")
    xs = x[order]
    if weights is None:
        cum = np.arange(1, x.size + 1, dtype=float) / x.size
    else:
        w = np.asarray(weights, dtype=float)[order]
        cum = np.cumsum(w)
        cum /= cum[-1]
    f = np.asarray(cdf(xs), dtype=float)
    prev = np.concatenate([[0.0], cum[:-1]])
    return float(max(np.max(cum - f), np.max(f - prev)))


@dataclass(frozen=True)
class ReliabilityBin:
    lo: float
    hi: float
    count: int
    mean_predicted: float  # nan when the bin is empty
    frequency: float  # nan when the bin is empty


@dataclass(frozen=True)
class ReliabilityTable:
    """Equal-width binning of predicted probabilities vs observed rates."""

    bins: tuple[ReliabilityBin, ...]
    n: int


def reliability(predictions, outcomes, bins: int = 10) -> ReliabilityTable:
    """Bin predictions on [0, 1] and compare to empirical frequencies."""
    if bins < 1:
        raise InputError("need at least one bin")
    p = np.asarray(predictions, dtype=float)
    o = np.asarray(outcomes, dtype=float)
    if p.shape != o.shape:
        raise InputError("predictions and outcomes must have the same shape")
    if np.any(p < 0.0) or np.any(p > 1.0):
        raise InputError("predicted probabilities must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.minimum(np.digitize(p, edges[1:-1], right=False), bins - 1)
    rows = []
    for b in range(bins):
        mask = idx == b
        count = int(np.count_nonzero(mask))
        rows.append(ReliabilityBin(
            lo=float(edges[b]),
            hi=float(edges[b + 1]),
            count=count,
            mean_predicted=float(np.mean(p[mask])) if count else float("nan"),
            frequency=float(np.mean(o[mask])) if count else float("nan"),
        ))
    return ReliabilityTable(bins=tuple(rows), n=p.size)


def coverage(intervals_or_band, realizations, mode: str = "pointwise") -> float:
    """Fraction of realizations inside per-step intervals or a band.

    ``pointwise`` counts (window, step) pairs; ``simultaneous`` counts
    whole windows falling entirely inside.
    """
    lower = np.asarray(intervals_or_band.lower, dtype=float)
    upper = np.asarray(intervals_or_band.upper, dtype=float)
    real = np.atleast_2d(np.asarray(realizations, dtype=float))
    if real.shape[1] != lower.size:
        raise InputError("realization width does not match the interval horizon")
    inside = (real >= lower) & (real <= upper)
    if mode == "pointwise":
        return float(np.mean(inside))
    if mode == "simultaneous":
        return float(np.mean(np.all(inside, axis=1)))
    raise InputError(f"mode must be 'pointwise' or 'simultaneous', got {mode!r}")
