import numpy as np
import pytest

from fforms import dists
from fforms.core import HorizonMeta, ParametricForecast, QuantileForecast, TrajectoryEnsemble


@pytest.fixture
def meta2():
    return HorizonMeta(origin=10, horizon=2)


@pytest.fixture
def meta3():
    return HorizonMeta(origin=0, horizon=3)


@pytest.fixture
def std_gaussian_pair(meta2):
    """h=2 forecast with independent-looking N(0,1) marginals."""
    return ParametricForecast(
        meta=meta2, family="gaussian",
        params=[dists.Gaussian(0.0, 1.0), dists.Gaussian(0.0, 1.0)],
    )


@pytest.fixture
def small_ensemble(meta2):
    return TrajectoryEnsemble(meta=meta2, paths=[[1.0, 2.0], [3.0, 4.0], [2.0, 0.0]])


@pytest.fixture
def gaussian_quantile_grid():
    """Exact N(0,1) quantiles on the nine-decile grid, h=1."""
    levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
    values = dists.quantile(dists.Gaussian(0.0, 1.0), levels)[None, :]
    return QuantileForecast(meta=HorizonMeta(0, 1), levels=levels, values=values)
