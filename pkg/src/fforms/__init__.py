"""fforms: the four time-series forecast forms and what you can do with them.

A forecast is more than a number sequence: its *form* (point, quantile,
per-step parametric marginals, or trajectory ensemble) decides which
operational questions it can answer.  This package provides

* typed containers for the four forms (:mod:`fforms.core`),
* distribution families backing parametric forecasts (:mod:`fforms.dists`),
* every conversion between forms, including copula lifting, conformal
  calibration and residual bootstrap (:mod:`fforms.convert`,
  :mod:`fforms.copulas`),
* the six canonical operational tasks (:mod:`fforms.tasks`),
* a task-aligned metric suite (:mod:`fforms.metrics`),
* an exact discrete-joint oracle for validating the Monte Carlo
  estimators (:mod:`fforms.oracle`),
* JSON/CSV interchange (:mod:`fforms.io`) and a command-line front end
  (:mod:`fforms.cli`).
"""

from fforms.core import (
    CalibrationSet,
    ForecastError,
    HistorySeries,
    HorizonMeta,
    InputError,
    MissingAssumptionError,
    ParametricForecast,
    PathwiseBand,
    PointForecast,
    QuantileForecast,
    StepIntervals,
    TrajectoryEnsemble,
    UnsupportedError,
    ValidationReport,
    rearrange_monotone,
    validate,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationSet",
    "ForecastError",
    "HistorySeries",
    "HorizonMeta",
    "InputError",
    "MissingAssumptionError",
    "ParametricForecast",
    "PathwiseBand",
    "PointForecast",
    "QuantileForecast",
    "StepIntervals",
    "TrajectoryEnsemble",
    "UnsupportedError",
    "ValidationReport",
    "rearrange_monotone",
    "validate",
    "__version__",
]
