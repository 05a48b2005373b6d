"""The four forecast forms and their shared containers.

A :data:`ForecastDocument` is one of :class:`PointForecast`,
:class:`QuantileForecast`, :class:`ParametricForecast` or
:class:`TrajectoryEnsemble`, each carrying :class:`HorizonMeta`.
Documents are immutable after construction (arrays are frozen) and
deliberately *permissive*: invariant violations do not raise at
construction time, so a document parsed from any source can be passed
to :func:`validate`, which reports every violation instead of silently
repairing anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from fforms import dists
from fforms.errors import (
    FitConvergenceError,
    ForecastError,
    InputError,
    MissingAssumptionError,
    UnsupportedError,
)

__all__ = [
    "HorizonMeta",
    "HistorySeries",
    "PointForecast",
    "QuantileForecast",
    "ParametricForecast",
    "TrajectoryEnsemble",
    "CalibrationSet",
    "ForecastDocument",
    "StepIntervals",
    "PathwiseBand",
    "ValidationReport",
    "validate",
    "rearrange_monotone",
    "ForecastError",
    "InputError",
    "UnsupportedError",
    "MissingAssumptionError",
    "FitConvergenceError",
]


def _frozen(arr, dtype=float, ndim=None) -> np.ndarray:
    out = np.asarray(arr, dtype=dtype)
    if ndim is not None and out.ndim != ndim:
        raise InputError(f"expected a {ndim}-d array, got shape {out.shape}")
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class HorizonMeta:
    """Forecast origin (last observed time index) and horizon length."""

    origin: int
    horizon: int
    step_labels: tuple[str, ...] | None = None

    def issues(self) -> list[str]:
        out = []
        if self.horizon < 1:
            out.append(f"horizon must be >= 1 (got {self.horizon})")
        if self.step_labels is not None and len(self.step_labels) != self.horizon:
            out.append("step_labels length does not match horizon")
        return out


class HistorySeries:
    """An observed series; the context a forecast was issued from."""

    def __init__(self, values):
        v = _frozen(values, ndim=1)
        if v.size < 1:
            raise InputError("history must contain at least one value")
        if not np.all(np.isfinite(v)):
            raise InputError("history values must be finite")
        self.values = v

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        return isinstance(other, HistorySeries) and np.array_equal(self.values, other.values)


class PointForecast:
    """One deterministic value per future step; no native uncertainty."""

    kind = "point"

    def __init__(self, meta: HorizonMeta, values):
        self.meta = meta
        self.values = _frozen(values, ndim=1)

    def __eq__(self, other):
        return (
            isinstance(other, PointForecast)
            and self.meta == other.meta
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"PointForecast(h={self.meta.horizon})"


class QuantileForecast:
    """Per-step quantile values on a shared ascending level grid.

    ``values[k][l]`` is the level-``levels[l]`` quantile of step ``k``.
    """

    kind = "quantile"

    def __init__(self, meta: HorizonMeta, levels, values):
        self.meta = meta
        self.levels = _frozen(levels, ndim=1)
        self.values = _frozen(values, ndim=2)

    def __eq__(self, other):
        return (
            isinstance(other, QuantileForecast)
            and self.meta == other.meta
            and np.array_equal(self.levels, other.levels)
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        return f"QuantileForecast(h={self.meta.horizon}, L={self.levels.size})"


class ParametricForecast:
    """Per-step marginal distributions from one family."""

    kind = "parametric"

    def __init__(self, meta: HorizonMeta, family: str, params):
        if family not in dists.FAMILIES:
            raise InputError(f"unknown family {family!r}; expected one of {dists.FAMILIES}")
        self.meta = meta
        self.family = family
        self.params = tuple(params)

    def __eq__(self, other):
        return (
            isinstance(other, ParametricForecast)
            and self.meta == other.meta
            and self.family == other.family
            and self.params == other.params
        )

    def __repr__(self):
        return f"ParametricForecast(h={self.meta.horizon}, family={self.family})"


class TrajectoryEnsemble:
    """Sampled joint paths; ``paths[m]`` is one complete future realization."""

    kind = "trajectory"

    def __init__(self, meta: HorizonMeta, paths, weights=None):
        self.meta = meta
        self.paths = _frozen(paths, ndim=2)
        self.weights = None if weights is None else _frozen(weights, ndim=1)

    @property
    def n_paths(self) -> int:
        return self.paths.shape[0]

    def effective_weights(self) -> np.ndarray:
        """Weights as stored, or the uniform default 1/M."""
        if self.weights is not None:
            return self.weights
        m = self.n_paths
        return np.full(m, 1.0 / m)

    def __eq__(self, other):
        if not isinstance(other, TrajectoryEnsemble):
            return False
        if self.meta != other.meta or not np.array_equal(self.paths, other.paths):
            return False
        if (self.weights is None) != (other.weights is None):
            return False
        return self.weights is None or np.array_equal(self.weights, other.weights)

    def __repr__(self):
        return f"TrajectoryEnsemble(M={self.paths.shape[0]}, h={self.meta.horizon})"


ForecastDocument = Union[PointForecast, QuantileForecast, ParametricForecast, TrajectoryEnsemble]


class CalibrationSet:
    """Paired (forecast, realization) records for conformal or bootstrap
    calibration; realization lengths must match each forecast's horizon."""

    def __init__(self, records):
        recs = []
        for i, (forecast, realization) in enumerate(records):
            real = _frozen(realization, ndim=1)
            if real.size != forecast.meta.horizon:
                raise InputError(
                    f"record {i}: realization length {real.size} != horizon "
                    f"{forecast.meta.horizon}"
                )
            recs.append((forecast, real))
        self.records = tuple(recs)

    def __len__(self):
        return len(self.records)


@dataclass(frozen=True, eq=False)
class StepIntervals:
    """Per-step intervals [lower_k, upper_k]; no joint coverage implied."""

    lower: np.ndarray
    upper: np.ndarray
    alpha: float | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "lower", _frozen(self.lower, ndim=1))
        object.__setattr__(self, "upper", _frozen(self.upper, ndim=1))
        if self.lower.shape != self.upper.shape:
            raise InputError("lower/upper length mismatch")
        if np.any(self.lower > self.upper + 1e-12):
            raise InputError("interval lower bound exceeds upper bound")


@dataclass(frozen=True, eq=False)
class PathwiseBand:
    """Simultaneous band center_k +/- multiplier * scale_k over the horizon."""

    center: np.ndarray
    scale: np.ndarray
    multiplier: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "center", _frozen(self.center, ndim=1))
        object.__setattr__(self, "scale", _frozen(self.scale, ndim=1))
        if self.center.shape != self.scale.shape:
            raise InputError("center/scale length mismatch")
        if np.any(self.scale < 0.0) or self.multiplier < 0.0:
            raise InputError("band scale and multiplier must be non-negative")

    @property
    def lower(self) -> np.ndarray:
        return self.center - self.multiplier * self.scale

    @property
    def upper(self) -> np.ndarray:
        return self.center + self.multiplier * self.scale


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of :func:`validate`: a list of violated invariants."""

    issues: tuple[str, ...]

    @property
    def ok(self) -> bool:
        return not self.issues

    def __bool__(self):
        return self.ok


def validate(document: ForecastDocument) -> ValidationReport:
    """Check every invariant of ``document`` and report violations.

    The document is never repaired; each violation becomes one report
    entry carrying the offending index.
    """
    issues: list[str] = list(document.meta.issues())
    h = document.meta.horizon

    if isinstance(document, PointForecast):
        if document.values.size != h:
            issues.append(f"values length {document.values.size} != horizon {h}")
        issues.extend(_finite_issues(document.values, "values"))

    elif isinstance(document, QuantileForecast):
        levels, values = document.levels, document.values
        issues.extend(_finite_issues(levels, "levels"))
        issues.extend(_finite_issues(values, "values"))
        if np.any(levels <= 0.0) or np.any(levels >= 1.0):
            issues.append("levels must lie in the open interval (0, 1)")
        for i in np.nonzero(np.diff(levels) <= 0.0)[0]:
            issues.append(f"levels not ascending at index {i + 1}")
        if values.shape != (h, levels.size):
            issues.append(
                f"values shape {values.shape} != (horizon, levels) = ({h}, {levels.size})"
            )
        else:
            crossing = np.any(np.diff(values, axis=1) < 0.0, axis=1)
            for k in np.nonzero(crossing)[0]:
                issues.append(f"quantile crossing at step {k}")

    elif isinstance(document, ParametricForecast):
        if len(document.params) != h:
            issues.append(f"params length {len(document.params)} != horizon {h}")
        for k, par in enumerate(document.params):
            if getattr(par, "family", None) != document.family:
                issues.append(f"step {k}: params are not {document.family}")
                continue
            for problem in par.issues():
                issues.append(f"step {k}: {problem}")

    elif isinstance(document, TrajectoryEnsemble):
        paths, weights = document.paths, document.weights
        if paths.shape[0] < 1:
            issues.append("ensemble must contain at least one path")
        if paths.shape[1] != h:
            issues.append(f"path length {paths.shape[1]} != horizon {h}")
        issues.extend(_finite_issues(paths, "paths"))
        if weights is not None:
            if weights.size != paths.shape[0]:
                issues.append(f"weights length {weights.size} != path count {paths.shape[0]}")
            issues.extend(_finite_issues(weights, "weights"))
            for i in np.nonzero(weights < 0.0)[0]:
                issues.append(f"negative weight at index {i}")
            total = float(np.sum(weights))
            if abs(total - 1.0) > 1e-9:
                issues.append(f"weights sum to {total!r}, expected 1 within 1e-9")
    else:
        issues.append(f"unknown document type {type(document).__name__}")

    return ValidationReport(issues=tuple(issues))


def _finite_issues(arr: np.ndarray, name: str) -> list[str]:
    bad = ~np.isfinite(arr)
    if not np.any(bad):
        return []
    idx = np.argwhere(bad)
    loc = ", ".join(str(tuple(i) if len(i) > 1 else i[0]) for i in idx[:5])
    suffix = "" if idx.shape[0] <= 5 else f" (+{idx.shape[0] - 5} more)"
    return [f"non-finite {name} at {loc}{suffix}"]


def rearrange_monotone(values_per_step) -> np.ndarray:
    """Monotone rearrangement: sort ascending, preserving the multiset.

    Idempotent; used to repair quantile crossing where the caller asks
    for it explicitly (validation never applies it automatically).
    """
    v = np.asarray(values_per_step, dtype=float)
    if not np.all(np.isfinite(v)):
        raise InputError("cannot rearrange non-finite values")
    return np.sort(v)
