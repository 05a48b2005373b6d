"""Synthetic AR(1) data with known conditional ground truth.

The generator y_t = rho * y_{t-1} + eps_t with unit Gaussian
innovations, started from its stationary law.  Conditional on the
window origin y_0, the next h steps are jointly Gaussian with known
mean vector and covariance, which makes these series the workhorse for
coverage, calibration and dependence experiments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fforms import dists
from fforms.core import HistorySeries, HorizonMeta, ParametricForecast, PointForecast, TrajectoryEnsemble
from fforms.errors import InputError


def _check_rho(rho: float) -> None:
    if not -1.0 < rho < 1.0:
        raise InputError(f"AR(1) coefficient must satisfy |rho| < 1, got {rho}")


def stationary_sd(rho: float) -> float:
    _check_rho(rho)
    return 1.0 / np.sqrt(1.0 - rho * rho)


def ar1_series(rho: float, n: int, seed: int) -> HistorySeries:
    """A length-n stationary AR(1) path with unit innovations."""
    _check_rho(rho)
    if n < 1:
        raise InputError("series length must be >= 1")
    rng = np.random.default_rng(seed)
    values = np.empty(n)
    values[0] = rng.normal(scale=stationary_sd(rho))
    eps = rng.standard_normal(n - 1)
    for t in range(1, n):
        values[t] = rho * values[t - 1] + eps[t - 1]
    return HistorySeries(values)


def conditional_moments(rho: float, y0: float, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    """Mean vector and covariance of (y_1..y_h) given the origin value."""
    _check_rho(rho)
    k = np.arange(1, horizon + 1)
    mean = y0 * rho**k
    var = (1.0 - rho ** (2 * k)) / (1.0 - rho * rho) if rho != 0.0 else np.ones(horizon)
    cov = np.empty((horizon, horizon))
    for i in range(horizon):
        for j in range(horizon):
            lo, hi = min(i, j), max(i, j)
            cov[i, j] = rho ** (hi - lo) * var[lo]
    return mean, cov


@dataclass(frozen=True)
class AR1Window:
    """One forecast window: origin value, realization, and the true
    conditional law of the h future steps."""

    window_id: str
    y0: float
    realization: np.ndarray
    mean: np.ndarray
    cov: np.ndarray


def ar1_windows(rho: float, horizon: int, n_windows: int, seed: int) -> list[AR1Window]:
    """Independent stationary-start windows (hence exchangeable)."""
    _check_rho(rho)
    rng = np.random.default_rng(seed)
    windows = []
    width = max(len(str(n_windows - 1)), 1)
    for i in range(n_windows):
        y0 = float(rng.normal(scale=stationary_sd(rho)))
        real = simulate_forward(rho, y0, horizon, 1, rng)[0]
        mean, cov = conditional_moments(rho, y0, horizon)
        windows.append(AR1Window(
            window_id=f"w{i:0{width}d}", y0=y0, realization=real, mean=mean, cov=cov,
        ))
    return windows


def simulate_forward(
    rho: float, y0: float, horizon: int, n_paths: int, rng: np.random.Generator
) -> np.ndarray:
    """Simulate n_paths continuations of length h from origin value y0."""
    paths = np.empty((n_paths, horizon))
    prev = np.full(n_paths, y0)
    for k in range(horizon):
        prev = rho * prev + rng.standard_normal(n_paths)
        paths[:, k] = prev
    return paths


def true_point_forecast(window: AR1Window, origin: int = 0) -> PointForecast:
    """The conditional-mean point forecast for a window."""
    meta = HorizonMeta(origin=origin, horizon=window.mean.size)
    return PointForecast(meta=meta, values=window.mean)


def true_parametric_forecast(window: AR1Window, origin: int = 0) -> ParametricForecast:
    """The exact conditional per-step Gaussian marginals for a window."""
    meta = HorizonMeta(origin=origin, horizon=window.mean.size)
    sd = np.sqrt(np.diag(window.cov))
    params = [dists.Gaussian(mu=float(m), sigma=float(s)) for m, s in zip(window.mean, sd)]
    return ParametricForecast(meta=meta, family=dists.GAUSSIAN, params=params)


def joint_ensemble(
    rho: float, window: AR1Window, n_paths: int, seed: int, origin: int = 0
) -> TrajectoryEnsemble:
    """Sample the true conditional joint (AR(1) forward simulation)."""
    rng = np.random.default_rng(seed)
    paths = simulate_forward(rho, window.y0, window.mean.size, n_paths, rng)
    meta = HorizonMeta(origin=origin, horizon=window.mean.size)
    return TrajectoryEnsemble(meta=meta, paths=paths)
