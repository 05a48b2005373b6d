"""The six canonical operational tasks.

Each task is implemented for every forecast type that can support it,
with trajectory-native Monte Carlo as the reference path.  Pairs that a
forecast type cannot reliably support raise :class:`UnsupportedError`
naming the missing capability; feasible-with-assumptions pairs record
every imposed assumption (copula, tail model, independence
approximation) in the result's ``provenance``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from fforms import convert, dists
from fforms.copulas import CopulaSpec, Independence
from fforms.core import (
    ForecastDocument,
    ParametricForecast,
    PathwiseBand,
    PointForecast,
    QuantileForecast,
    StepIntervals,
    TrajectoryEnsemble,
)
from fforms.errors import InputError, UnsupportedError

TASKS = (
    "pointwise_intervals",
    "pathwise_band",
    "event_probability",
    "threshold_crossing",
    "window_aggregate",
    "scenario_generation",
)

# feasibility of (task, forecast kind): "native", "assumptions", "unsuitable"
FEASIBILITY = {
    "pointwise_intervals": {"point": "assumptions", "quantile": "native",
                            "parametric": "native", "trajectory": "native"},
    "pathwise_band": {"point": "assumptions", "quantile": "assumptions",
                      "parametric": "assumptions", "trajectory": "native"},
    "event_probability": {"point": "unsuitable", "quantile": "assumptions",
                          "parametric": "assumptions", "trajectory": "native"},
    "threshold_crossing": {"point": "unsuitable", "quantile": "assumptions",
                           "parametric": "assumptions", "trajectory": "native"},
    "window_aggregate": {"point": "assumptions", "quantile": "assumptions",
                         "parametric": "assumptions", "trajectory": "native"},
    "scenario_generation": {"point": "unsuitable", "quantile": "assumptions",
                            "parametric": "assumptions", "trajectory": "native"},
}

_UNSUITABLE_REASON = {
    ("event_probability", "point"):
        "point forecasts cannot produce calibrated event probabilities; "
        "conformal methods yield coverage bands, not probabilities",
    ("threshold_crossing", "point"):
        "point forecasts give only a point estimate of the hitting time, "
        "no crossing-probability distribution",
    ("scenario_generation", "point"):
        "a point forecast is a single central path, not a scenario distribution",
}


def require_feasible(task: str, document: ForecastDocument) -> str:
    """Check the task/forecast-type compatibility matrix.

    Returns the feasibility class; raises :class:`UnsupportedError` for
    pairs marked unsuitable (cannot reliably support the task).
    """
    if task not in FEASIBILITY:
        raise InputError(f"unknown task {task!r}; expected one of {TASKS}")
    kind = document.kind
    level = FEASIBILITY[task][kind]
    if level == "unsuitable":
        reason = _UNSUITABLE_REASON.get((task, kind), "")
        raise UnsupportedError(
            f"task {task!r} is unsuitable for {kind} forecasts"
            + (f": {reason}" if reason else "")
        )
    return level


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EventSpec:
    """A path functional over a window, compared against a threshold.

    ``functional`` is one of ``sum``, ``max``, ``min`` (the event is
    {g(path over window) comparator threshold}) or ``first_crossing``
    (the event is {some step in the window crosses the threshold}).
    ``window`` holds 1-based step indices.
    """

    window: tuple[int, ...]
    functional: str
    comparator: str
    threshold: float

    def __post_init__(self):
        win = tuple(int(i) for i in self.window)
        if not win:
            raise InputError("event window must be non-empty")
        if any(i < 1 for i in win):
            raise InputError("window indices are 1-based and must be >= 1")
        object.__setattr__(self, "window", win)
        if self.functional not in ("sum", "max", "min", "first_crossing"):
            raise InputError(f"unknown functional {self.functional!r}")
        if self.comparator not in (">=", "<="):
            raise InputError(f"comparator must be '>=' or '<=', got {self.comparator!r}")

    def check_horizon(self, horizon: int) -> None:
        if max(self.window) > horizon:
            raise InputError(
                f"window index {max(self.window)} exceeds horizon {horizon}"
            )


@dataclass(frozen=True)
class SurvivalCurve:
    """Per-step survival probabilities S(1..h), right-censored at h."""

    survival: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.survival, dtype=float)
        if s.ndim != 1 or s.size < 1:
            raise InputError("survival curve must be a non-empty 1-d sequence")
        if np.any(s < -1e-12) or np.any(s > 1.0 + 1e-12):
            raise InputError("survival values must lie in [0, 1]")
        if np.any(np.diff(s) > 1e-12):
            raise InputError("survival curve must be non-increasing")
        s = np.clip(s, 0.0, 1.0)
        s.flags.writeable = False
        object.__setattr__(self, "survival", s)

    @property
    def horizon(self) -> int:
        return self.survival.size

    @property
    def censored_mass(self) -> float:
        """P(no crossing within the horizon) = S(h)."""
        return float(self.survival[-1])

    def hitting_pmf(self) -> np.ndarray:
        """P(tau = k) for k = 1..h; sums to 1 - censored_mass."""
        prev = np.concatenate([[1.0], self.survival[:-1]])
        return prev - self.survival


@dataclass(frozen=True)
class SurvivalEstimate:
    """Trajectory-based survival curve with its hitting-time mass function."""

    curve: SurvivalCurve
    hitting_pmf: np.ndarray

    @property
    def censored_mass(self) -> float:
        return self.curve.censored_mass


@dataclass(frozen=True)
class EventProbability:
    """Monte Carlo (or exact) event probability with standard error."""

    probability: float
    standard_error: float
    provenance: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Task 1: pointwise prediction intervals
# ---------------------------------------------------------------------------

def pointwise_intervals(f: ForecastDocument, alpha: float) -> StepIntervals:
    """Central (1-alpha) interval per step from the forecast's marginals."""
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    require_feasible("pointwise_intervals", f)
    lo_q, hi_q = alpha / 2.0, 1.0 - alpha / 2.0
    prov = {"task": "pointwise_intervals", "alpha": alpha, "source": f.kind}

    if isinstance(f, PointForecast):
        raise UnsupportedError(
            "point forecasts have no native uncertainty; calibrate with "
            "convert.point_to_intervals_conformal and a calibration set"
        )
    if isinstance(f, QuantileForecast):
        levels = f.levels
        if lo_q < levels[0] - 1e-12 or hi_q > levels[-1] + 1e-12:
            raise InputError(
                f"levels {lo_q:.4g}/{hi_q:.4g} fall outside the trained grid "
                f"[{levels[0]}, {levels[-1]}]; requires retraining or a tail model"
            )
        lower = np.array([np.interp(lo_q, levels, row) for row in f.values])
        upper = np.array([np.interp(hi_q, levels, row) for row in f.values])
    elif isinstance(f, ParametricForecast):
        lower = np.array([dists.quantile(p, lo_q) for p in f.params])
        upper = np.array([dists.quantile(p, hi_q) for p in f.params])
    elif isinstance(f, TrajectoryEnsemble):
        w = f.weights
        lower = np.array(
            [dists.inf_quantile(f.paths[:, k], lo_q, weights=w) for k in range(f.meta.horizon)]
        )
        upper = np.array(
            [dists.inf_quantile(f.paths[:, k], hi_q, weights=w) for k in range(f.meta.horizon)]
        )
    else:
        raise UnsupportedError(f"unknown forecast type {type(f).__name__}")
    return StepIntervals(lower=lower, upper=upper, alpha=alpha, provenance=prov)


# ---------------------------------------------------------------------------
# Task 2: pathwise bands
# ---------------------------------------------------------------------------

def pathwise_band_from_trajectory(
    ens: TrajectoryEnsemble, alpha: float, center_scale: str = "median_mad"
) -> PathwiseBand:
    """Simultaneous band from normalized sup-deviations of the ensemble.

    The multiplier is the inf-based (1-alpha)-quantile of
    d_m = max_k |y_m,k - center_k| / scale_k, so at least
    ceil((1-alpha) * M) complete paths lie inside the band by
    construction.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    if ens.n_paths < 2:
        raise InputError("need at least 2 paths for a pathwise band")
    w = ens.effective_weights()
    if center_scale == "median_mad":
        center = np.array([_midpoint_median(ens.paths[:, k], w) for k in range(ens.meta.horizon)])
        dev = np.abs(ens.paths - center)
        scale = np.array([_midpoint_median(dev[:, k], w) for k in range(ens.meta.horizon)])
    elif center_scale == "mean_sd":
        center = np.average(ens.paths, axis=0, weights=w)
        scale = np.sqrt(np.average((ens.paths - center) ** 2, axis=0, weights=w))
    else:
        raise InputError(f"center_scale must be 'median_mad' or 'mean_sd', got {center_scale!r}")
    scale = np.maximum(scale, 1e-12)
    d = np.max(np.abs(ens.paths - center) / scale, axis=1)
    c = float(dists.inf_quantile(d, 1.0 - alpha, weights=ens.weights))
    return PathwiseBand(
        center=center,
        scale=scale,
        multiplier=c,
        provenance={"task": "pathwise_band", "alpha": alpha,
                    "center_scale": center_scale, "source": "trajectory"},
    )


def _midpoint_median(x: np.ndarray, w: np.ndarray) -> float:
    """Weighted median, averaging the two straddling values when the
    cumulative weight hits exactly one half (matches ``np.median`` for
    uniform weights)."""
    order = np.argsort(x, kind="stable")
    xs, cum = x[order], np.cumsum(w[order])
    cum = cum / cum[-1]
    idx = int(np.searchsorted(cum, 0.5 - 1e-12, side="left"))
    if abs(cum[idx] - 0.5) <= 1e-12 and idx + 1 < xs.size:
        return float((xs[idx] + xs[idx + 1]) / 2.0)
    return float(xs[idx])


def band_sidak(
    f: ParametricForecast | QuantileForecast, alpha: float, correction: str = "sidak"
) -> PathwiseBand:
    """Conservative simultaneous band from per-step marginal intervals.

    Each step gets a central interval at the corrected level
    alpha' = 1 - (1-alpha)^(1/h) (Sidak; exact under per-step
    independence) or alpha / h (Bonferroni; always conservative).
    """
    if not isinstance(f, (ParametricForecast, QuantileForecast)):
        raise UnsupportedError(
            "Sidak/Bonferroni bands apply to marginal forecasts; use "
            "pathwise_band_from_trajectory for ensembles"
        )
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    h = f.meta.horizon
    if correction == "sidak":
        alpha_step = 1.0 - (1.0 - alpha) ** (1.0 / h)
    elif correction == "bonferroni":
        alpha_step = alpha / h
    else:
        raise InputError(f"correction must be 'sidak' or 'bonferroni', got {correction!r}")
    ivs = pointwise_intervals(f, alpha_step)
    return PathwiseBand(
        center=(ivs.lower + ivs.upper) / 2.0,
        scale=(ivs.upper - ivs.lower) / 2.0,
        multiplier=1.0,
        provenance={"task": "pathwise_band", "alpha": alpha, "correction": correction,
                    "per_step_alpha": alpha_step, "source": f.kind,
                    "independence_assumed": correction == "sidak"},
    )


# ---------------------------------------------------------------------------
# Task 3: event and tail probabilities
# ---------------------------------------------------------------------------

def event_probability(ens: TrajectoryEnsemble, e: EventSpec) -> EventProbability:
    """Weighted fraction of paths realizing the event, with binomial SE."""
    e.check_horizon(ens.meta.horizon)
    ind = _event_indicator(ens.paths, e)
    w = ens.effective_weights()
    p = float(np.sum(w[ind]))
    se = float(np.sqrt(max(p * (1.0 - p), 0.0) / ens.n_paths))
    return EventProbability(
        probability=p,
        standard_error=se,
        provenance={"task": "event_probability", "source": "trajectory",
                    "n_paths": ens.n_paths},
    )


def _event_indicator(paths: np.ndarray, e: EventSpec) -> np.ndarray:
    cols = [i - 1 for i in e.window]
    sub = paths[:, cols]
    if e.functional == "first_crossing":
        hit = sub >= e.threshold if e.comparator == ">=" else sub <= e.threshold
        return np.any(hit, axis=1)
    if e.functional == "sum":
        val = np.sum(sub, axis=1)
    elif e.functional == "max":
        val = np.max(sub, axis=1)
    else:
        val = np.min(sub, axis=1)
    return val >= e.threshold if e.comparator == ">=" else val <= e.threshold


def event_probability_marginal(
    f: ParametricForecast | QuantileForecast,
    e: EventSpec,
    copula: CopulaSpec,
    n_paths: int,
    seed: int,
    *,
    tails=None,
    strict_tails: bool = False,
) -> EventProbability:
    """Event probability after lifting marginals through a copula."""
    require_feasible("event_probability", f)
    ens = convert.marginals_to_trajectory(
        f, copula, n_paths, seed, tails=tails, strict_tails=strict_tails
    )
    base = event_probability(ens, e)
    prov = dict(base.provenance)
    prov.update({"source": f.kind, "copula": copula.describe(), "seed": seed,
                 "dependence_assumed": True})
    return EventProbability(base.probability, base.standard_error, prov)


def path_losses(ens: TrajectoryEnsemble) -> np.ndarray:
    """Per-path loss: the negated sum of the path over the horizon."""
    return -np.sum(ens.paths, axis=1)


def value_at_risk(ens: TrajectoryEnsemble, alpha: float) -> float:
    """Inf-based (1-alpha)-quantile of the predictive loss distribution."""
    if not 0.0 < alpha < 1.0:
        raise InputError("alpha must lie in (0, 1)")
    return float(dists.inf_quantile(path_losses(ens), 1.0 - alpha, weights=ens.weights))


def loss_exceedance_probability(ens: TrajectoryEnsemble, threshold: float) -> float:
    """P(loss > threshold), the tail-probability companion of VaR."""
    losses = path_losses(ens)
    w = ens.effective_weights()
    return float(np.sum(w[losses > threshold]))


# ---------------------------------------------------------------------------
# Task 4: threshold crossing and persistence
# ---------------------------------------------------------------------------

def survival_from_marginals(
    f: ParametricForecast | QuantileForecast, threshold: float, direction: str
) -> SurvivalCurve:
    """Survival curve under the independence approximation S(k) = prod(1 - p_j).

    p_j is the marginal crossing probability at step j.  The result is
    tagged ``independence_approximation``: it ignores path history and
    typically understates persistence in autocorrelated series.
    """
    require_feasible("threshold_crossing", f)
    if direction not in (">=", "<="):
        raise InputError(f"direction must be '>=' or '<=', got {direction!r}")
    if isinstance(f, QuantileForecast):
        f = convert.quantile_to_interpolated_cdf(f)
    p = np.empty(f.meta.horizon)
    for k, params in enumerate(f.params):
        _check_threshold_in_support(params, threshold, step=k)
        cdf_val = dists.cdf(params, threshold)
        p[k] = 1.0 - cdf_val if direction == ">=" else cdf_val
    survival = np.cumprod(1.0 - p)
    return SurvivalCurve(
        survival=survival,
        provenance={"task": "threshold_crossing", "independence_approximation": True,
                    "source": f.kind, "threshold": threshold, "direction": direction},
    )


def _check_threshold_in_support(params, threshold: float, step: int) -> None:
    if isinstance(params, dists.EmpiricalInterpolant):
        if not params.values[0] <= threshold <= params.values[-1]:
            raise InputError(
                f"threshold {threshold} outside the interpolated support "
                f"[{params.values[0]}, {params.values[-1]}] at step {step}; "
                "attach a tail model"
            )
    elif isinstance(params, dists.SplicedGPDTails):
        lo_ok = params.lower is not None or threshold >= params.body.values[0]
        hi_ok = params.upper is not None or threshold <= params.body.values[-1]
        if not (lo_ok and hi_ok):
            raise InputError(
                f"threshold {threshold} outside the modeled support at step {step}"
            )


def survival_from_trajectories(
    ens: TrajectoryEnsemble, threshold: float, direction: str
) -> SurvivalEstimate:
    """Empirical hitting-time distribution from the ensemble paths."""
    if direction not in (">=", "<="):
        raise InputError(f"direction must be '>=' or '<=', got {direction!r}")
    hit = ens.paths >= threshold if direction == ">=" else ens.paths <= threshold
    w = ens.effective_weights()
    h = ens.meta.horizon
    any_hit = np.any(hit, axis=1)
    first = np.argmax(hit, axis=1)  # 0-based step of first crossing
    pmf = np.zeros(h)
    np.add.at(pmf, first[any_hit], w[any_hit])
    survival = np.clip(1.0 - np.cumsum(pmf), 0.0, 1.0)
    curve = SurvivalCurve(
        survival=survival,
        provenance={"task": "threshold_crossing", "source": "trajectory",
                    "n_paths": ens.n_paths, "threshold": threshold,
                    "direction": direction},
    )
    return SurvivalEstimate(curve=curve, hitting_pmf=pmf)


def hazard_from_survival(curve: SurvivalCurve) -> np.ndarray:
    """Discrete hazard h_k = (S(k-1) - S(k)) / S(k-1), with S(0) = 1.

    Defined as 0 where the process is already absorbed (S(k-1) = 0);
    cumprod(1 - h) reconstructs the survival curve to 1e-12.
    """
    s = curve.survival
    prev = np.concatenate([[1.0], s[:-1]])
    with np.errstate(divide="ignore", invalid="ignore"):
        hz = np.where(prev > 0.0, (prev - s) / np.where(prev > 0.0, prev, 1.0), 0.0)
    return hz


# ---------------------------------------------------------------------------
# Task 5: window aggregates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WindowAggregate:
    """Aggregate Z = sum of the window's steps: mean and, when available,
    its distribution (empirical samples or a closed-form Gaussian)."""

    mean: float
    samples: np.ndarray | None = None
    sample_weights: np.ndarray | None = None
    gaussian: dists.Gaussian | None = None
    provenance: dict = field(default_factory=dict)

    def quantile(self, q: float) -> float:
        if self.samples is not None:
            return float(dists.inf_quantile(self.samples, q, weights=self.sample_weights))
        if self.gaussian is not None:
            return float(dists.quantile(self.gaussian, q))
        raise UnsupportedError("no distribution attached to this aggregate")

    def cdf(self, z: float) -> float:
        if self.samples is not None:
            w = (
                self.sample_weights
                if self.sample_weights is not None
                else np.full(self.samples.size, 1.0 / self.samples.size)
            )
            return float(np.sum(w[self.samples <= z]))
        if self.gaussian is not None:
            return float(dists.cdf(self.gaussian, z))
        raise UnsupportedError("no distribution attached to this aggregate")


def window_aggregate(
    f: ForecastDocument,
    window,
    output: str = "mean",
    copula: CopulaSpec | None = None,
    n_paths: int | None = None,
    seed: int | None = None,
) -> WindowAggregate:
    """Mean or full distribution of the window sum Z.

    Trajectories aggregate per path (preserving time dependence).
    Marginal forecasts sum per-step means without extra assumptions;
    their full distribution needs a copula, except the exact
    Gaussian-independence shortcut.  Point forecasts provide the sum as
    a baseline with no uncertainty.
    """
    require_feasible("window_aggregate", f)
    win = tuple(int(i) for i in window)
    if not win or any(i < 1 or i > f.meta.horizon for i in win):
        raise InputError(f"window must be non-empty with indices in 1..{f.meta.horizon}")
    cols = [i - 1 for i in win]
    if output not in ("mean", "distribution"):
        raise InputError(f"output must be 'mean' or 'distribution', got {output!r}")
    prov = {"task": "window_aggregate", "window": list(win), "source": f.kind}

    if isinstance(f, PointForecast):
        if output == "distribution":
            raise UnsupportedError(
                "point forecasts carry no uncertainty; only the mean baseline "
                "is available for window aggregates"
            )
        prov["no_uncertainty"] = True
        return WindowAggregate(mean=float(np.sum(f.values[cols])), provenance=prov)

    if isinstance(f, TrajectoryEnsemble):
        z = np.sum(f.paths[:, cols], axis=1)
        w = f.effective_weights()
        mean = float(np.sum(w * z))
        if output == "mean":
            return WindowAggregate(mean=mean, provenance=prov)
        return WindowAggregate(
            mean=mean, samples=z, sample_weights=f.weights, provenance=prov
        )

    # marginal forecasts
    if isinstance(f, QuantileForecast):
        means = convert.quantile_to_point(f, statistic="mean").values
        prov["tail_extension"] = True
    else:
        means = np.array([dists.mean(p) for p in f.params])
    mean = float(np.sum(means[cols]))
    if output == "mean":
        return WindowAggregate(mean=mean, provenance=prov)

    if (
        isinstance(f, ParametricForecast)
        and f.family == dists.GAUSSIAN
        and isinstance(copula, Independence)
    ):
        var = float(sum(f.params[c].sigma ** 2 for c in cols))
        prov.update({"copula": copula.describe(), "closed_form": "gaussian_sum"})
        return WindowAggregate(
            mean=mean,
            gaussian=dists.Gaussian(mu=mean, sigma=float(np.sqrt(var))),
            provenance=prov,
        )
    if copula is None or n_paths is None or seed is None:
        raise _missing_dependence("the window-sum distribution")
    ens = convert.marginals_to_trajectory(f, copula, n_paths, seed)
    result = window_aggregate(ens, win, output="distribution")
    prov.update({"copula": copula.describe(), "n_paths": n_paths, "seed": seed,
                 "dependence_assumed": True})
    return WindowAggregate(
        mean=result.mean, samples=result.samples, sample_weights=result.sample_weights,
        provenance=prov,
    )


def _missing_dependence(what: str):
    from fforms.errors import MissingAssumptionError

    return MissingAssumptionError(
        f"computing {what} from marginal forecasts requires dependence "
        "assumptions: supply copula, n_paths and seed"
    )


# ---------------------------------------------------------------------------
# Task 6: scenario generation and ranking
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScenarioFunctionals:
    """Per-path summary functionals: peak, exceedance count, cumulative sum."""

    peak: np.ndarray
    exceedance: np.ndarray
    cumulative: np.ndarray
    weights: np.ndarray
    threshold: float

    def cdf(self, which: str, x: float) -> float:
        vals = getattr(self, which)
        return float(np.sum(self.weights[vals <= x]))


def scenario_functionals(ens: TrajectoryEnsemble, threshold: float) -> ScenarioFunctionals:
    """Peak, count of steps strictly above the threshold, and path sum."""
    return ScenarioFunctionals(
        peak=np.max(ens.paths, axis=1),
        exceedance=np.sum(ens.paths > threshold, axis=1).astype(float),
        cumulative=np.sum(ens.paths, axis=1),
        weights=ens.effective_weights(),
        threshold=threshold,
    )


class LossExceedanceCurve:
    """Step function EP(x) = P(L > x) over the per-path losses."""

    def __init__(self, losses: np.ndarray, weights: np.ndarray):
        order = np.argsort(losses, kind="stable")
        self.losses = losses[order]
        self.weights = weights[order]
        self._cum = np.cumsum(self.weights)

    def __call__(self, x) -> np.ndarray | float:
        xs, scalar = np.asarray(x, dtype=float), np.ndim(x) == 0
        idx = np.searchsorted(self.losses, np.atleast_1d(xs), side="right")
        mass_le = np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)
        out = self._cum[-1] - mass_le
        return float(out[0]) if scalar else out


@dataclass(frozen=True)
class ClusterSummary:
    """One scenario cluster: representative path, weight and severity."""

    medoid_index: int
    member_indices: tuple[int, ...]
    weight: float
    mean_loss: float
    loss_q95: float


@dataclass(frozen=True)
class ScenarioRanking:
    """Scenarios (or clusters) ranked by probability-weighted severity."""

    order: np.ndarray
    scores: np.ndarray
    losses: np.ndarray
    weights: np.ndarray
    exceedance_curve: LossExceedanceCurve
    clusters: tuple[ClusterSummary, ...] | None = None
    provenance: dict = field(default_factory=dict)


def scenario_rank(
    ens: TrajectoryEnsemble,
    losses,
    mode: str = "per_path",
    k: int | None = None,
    seed: int | None = None,
    threshold: float | None = None,
) -> ScenarioRanking:
    """Rank scenarios by probability-weighted loss, optionally clustered.

    ``per_path`` ranks paths by r_m = w_m * loss_m.  ``clustered`` runs
    seeded k-medoids on standardized (peak, exceedance, cumulative)
    features, weighs clusters by member fraction and reports mean and
    95th-percentile loss per cluster.  Losses must be non-negative.
    """
    losses = np.asarray(losses, dtype=float)
    if losses.ndim != 1 or losses.size != ens.n_paths:
        raise InputError("need one loss value per path")
    if not np.all(np.isfinite(losses)):
        raise InputError("loss values must be finite")
    if np.any(losses < 0.0):
        raise InputError("negative loss values are not allowed")
    w = ens.effective_weights()
    curve = LossExceedanceCurve(losses, w)

    if mode == "per_path":
        scores = w * losses
        order = np.argsort(-scores, kind="stable")
        return ScenarioRanking(
            order=order, scores=scores, losses=losses, weights=w,
            exceedance_curve=curve,
            provenance={"task": "scenario_generation", "mode": "per_path"},
        )
    if mode != "clustered":
        raise InputError(f"mode must be 'per_path' or 'clustered', got {mode!r}")
    if k is None or seed is None:
        raise InputError("clustered mode needs k and seed")
    if k > ens.n_paths:
        raise InputError(f"k = {k} exceeds the number of paths {ens.n_paths}")
    if threshold is None:
        raise InputError("clustered mode needs the exceedance threshold")

    funcs = scenario_functionals(ens, threshold)
    feats = np.column_stack([funcs.peak, funcs.exceedance, funcs.cumulative])
    feats = (feats - feats.mean(axis=0)) / np.maximum(feats.std(axis=0), 1e-12)
    medoids, assign = _kmedoids(feats, k, seed)
    clusters = []
    for j, med in enumerate(medoids):
        members = np.nonzero(assign == j)[0]
        weight = float(np.sum(w[members]))
        mean_loss = float(np.average(losses[members], weights=w[members]))
        q95 = float(dists.inf_quantile(losses[members], 0.95, weights=w[members]))
        clusters.append(ClusterSummary(
            medoid_index=int(med), member_indices=tuple(int(i) for i in members),
            weight=weight, mean_loss=mean_loss, loss_q95=q95,
        ))
    clusters.sort(key=lambda c: (-c.mean_loss, c.medoid_index))
    scores = w * losses
    order = np.argsort(-scores, kind="stable")
    return ScenarioRanking(
        order=order, scores=scores, losses=losses, weights=w,
        exceedance_curve=curve, clusters=tuple(clusters),
        provenance={"task": "scenario_generation", "mode": "clustered", "k": k,
                    "seed": seed, "features": ["peak", "exceedance", "cumulative"],
                    "distance": "squared_euclidean_standardized"},
    )


def _kmedoids(
    feats: np.ndarray, k: int, seed: int, max_iter: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.default_rng(seed)
    n = feats.shape[0]
    diff = feats[:, None, :] - feats[None, :, :]
    dist = np.sum(diff * diff, axis=2)
    medoids = np.sort(rng.choice(n, size=k, replace=False))
    for _ in range(max_iter):
        assign = np.argmin(dist[:, medoids], axis=1)
        new_medoids = medoids.copy()
        for j in range(k):
            members = np.nonzero(assign == j)[0]
            if members.size == 0:
                continue
            within = dist[np.ix_(members, members)].sum(axis=1)
            new_medoids[j] = members[np.argmin(within)]
        if np.array_equal(new_medoids, medoids):
            break
        medoids = new_medoids
    assign = np.argmin(dist[:, medoids], axis=1)
    return medoids, assign
