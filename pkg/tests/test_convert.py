import numpy as np
import pytest
from scipy import stats

from fforms import convert, dists, metrics
from fforms.convert import ConformalConfig, GPDTailSettings, TailAssumptionWarning
from fforms.copulas import Comonotonic, GaussianAR1, Independence
from fforms.core import (
    CalibrationSet,
    HorizonMeta,
    InputError,
    MissingAssumptionError,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
    validate,
)
from fforms.demos import dkw_bound


class TestTrajToQuantile:
    def test_inf_based_quantiles(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[1, 1], [2, 2], [3, 3], [4, 4]])
        q = convert.traj_to_quantile(ens, [0.25, 0.5])
        assert q.values[0].tolist() == [1.0, 2.0]

    def test_constant_ensemble(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[7.0, 7.0]] * 5)
        q = convert.traj_to_quantile(ens, [0.1, 0.5, 0.9])
        assert np.all(q.values == 7.0)

    def test_output_validates(self, small_ensemble):
        q = convert.traj_to_quantile(small_ensemble, [0.2, 0.5, 0.8])
        assert validate(q).ok


class TestTrajToParametric:
    def test_gaussian_closed_form(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[-1.0, 5.0], [1.0, 5.0 + 2.0]])
        p = convert.traj_to_parametric(ens, "gaussian")
        assert p.params[0].mu == pytest.approx(0.0)
        assert p.params[0].sigma == pytest.approx(1.0)

    def test_constant_column_errors(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[1.0, 5.0], [2.0, 5.0]])
        with pytest.raises(InputError, match="step 1"):
            convert.traj_to_parametric(ens, "gaussian")

    def test_empirical_matches_empirical_cdf(self, small_ensemble):
        p = convert.traj_to_parametric(small_ensemble, "empirical")
        expected = dists.empirical_cdf(small_ensemble.paths[:, 0])
        assert p.params[0] == expected


class TestWeightedEnsembles:
    def test_weighted_quantiles(self):
        ens = TrajectoryEnsemble(
            HorizonMeta(0, 1), paths=[[1.0], [2.0], [3.0]], weights=[0.6, 0.2, 0.2]
        )
        q = convert.traj_to_quantile(ens, [0.5, 0.7, 0.9])
        assert q.values[0].tolist() == [1.0, 2.0, 3.0]

    def test_weighted_empirical_fit(self):
        ens = TrajectoryEnsemble(
            HorizonMeta(0, 1), paths=[[1.0], [1.0], [2.0]], weights=[0.25, 0.25, 0.5]
        )
        p = convert.traj_to_parametric(ens, "empirical")
        interp = p.params[0]
        assert interp.values.tolist() == [1.0, 2.0]
        assert interp.probs.tolist() == [0.5, 1.0]

    def test_weighted_gaussian_fit(self):
        ens = TrajectoryEnsemble(
            HorizonMeta(0, 1), paths=[[0.0], [2.0]], weights=[0.75, 0.25]
        )
        p = convert.traj_to_parametric(ens, "gaussian")
        assert p.params[0].mu == pytest.approx(0.5)
        assert p.params[0].sigma == pytest.approx(np.sqrt(0.75))


class TestTrajToPoint:
    def test_mean(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[0.0, 2.0], [2.0, 0.0]])
        assert convert.traj_to_point(ens, "mean").values.tolist() == [1.0, 1.0]

    def test_single_path(self, meta2):
        ens = TrajectoryEnsemble(meta2, paths=[[3.0, 4.0]])
        for stat in ("mean", "median"):
            assert convert.traj_to_point(ens, stat).values.tolist() == [3.0, 4.0]

    def test_median_inf_based(self):
        ens = TrajectoryEnsemble(HorizonMeta(0, 1), paths=[[0.0], [1.0], [10.0]])
        assert convert.traj_to_point(ens, "median").values[0] == 1.0


class TestParametricConversions:
    def test_median_column(self, std_gaussian_pair):
        q = convert.parametric_to_quantile(std_gaussian_pair, [0.5])
        assert np.allclose(q.values, 0.0)

    def test_interval_endpoints(self, std_gaussian_pair):
        q = convert.parametric_to_quantile(std_gaussian_pair, [0.025, 0.975])
        assert q.values[0, 0] == pytest.approx(-1.95996, abs=1e-5)
        assert q.values[0, 1] == pytest.approx(1.95996, abs=1e-5)

    def test_location_monotonicity(self, meta3):
        f = ParametricForecast(
            meta3, "gaussian", [dists.Gaussian(float(k), 1.0) for k in range(3)]
        )
        q = convert.parametric_to_quantile(f, [0.2, 0.8])
        assert np.all(np.diff(q.values, axis=0) > 0)

    def test_point_mean_median(self):
        f = ParametricForecast(HorizonMeta(0, 1), "gaussian", [dists.Gaussian(3.0, 5.0)])
        assert convert.parametric_to_point(f, "mean").values[0] == 3.0
        t = ParametricForecast(HorizonMeta(0, 1), "student_t", [dists.StudentT(2, 1, 5)])
        assert convert.parametric_to_point(t, "median").values[0] == pytest.approx(2.0)

    def test_undefined_mean_propagates(self):
        t = ParametricForecast(HorizonMeta(0, 1), "student_t", [dists.StudentT(0, 1, 0.5)])
        with pytest.raises(InputError, match="mean undefined"):
            convert.parametric_to_point(t, "mean")


class TestMarginalsToTrajectory:
    def test_comonotonic_identical_marginals_gives_constant_paths(self, std_gaussian_pair):
        ens = convert.marginals_to_trajectory(std_gaussian_pair, Comonotonic(), 200, seed=1)
        assert np.allclose(ens.paths[:, 0], ens.paths[:, 1])

    def test_prop2_event_triple(self, std_gaussian_pair):
        # P(Y1 <= 0 and Y2 <= 0) under independence vs comonotonic
        probs = {}
        from fforms.copulas import Countermonotonic

        for name, spec in [("ind", Independence()), ("com", Comonotonic()),
                           ("ctr", Countermonotonic())]:
            ens = convert.marginals_to_trajectory(std_gaussian_pair, spec, 100000, seed=42)
            both = np.mean((ens.paths[:, 0] <= 0) & (ens.paths[:, 1] <= 0))
            probs[name] = both
        assert probs["ind"] == pytest.approx(0.25, abs=0.01)
        assert probs["com"] == pytest.approx(0.5, abs=0.01)
        assert probs["ctr"] == pytest.approx(0.0, abs=0.005)

    def test_marginal_preservation_dkw(self, std_gaussian_pair):
        ens = convert.marginals_to_trajectory(
            std_gaussian_pair, GaussianAR1(0.7), 10000, seed=7
        )
        bound = dkw_bound(10000)
        for k in range(2):
            d = metrics.ks_statistic(ens.paths[:, k], stats.norm.cdf)
            assert d < bound

    def test_interpolant_clipping_warns(self, gaussian_quantile_grid):
        with pytest.warns(TailAssumptionWarning, match="clipped"):
            convert.marginals_to_trajectory(
                gaussian_quantile_grid, Independence(), 5000, seed=3
            )

    def test_strict_tails_raises(self, gaussian_quantile_grid):
        with pytest.raises(MissingAssumptionError):
            convert.marginals_to_trajectory(
                gaussian_quantile_grid, Independence(), 5000, seed=3, strict_tails=True
            )

    def test_ecc_preserves_marginals_exactly(self, std_gaussian_pair):
        from fforms.copulas import ECC

        rng = np.random.default_rng(8)
        ref = TrajectoryEnsemble(HorizonMeta(0, 2), rng.standard_normal((256, 2)))
        spec = ECC(reference=ref, variant="Q")
        u_ens = convert.marginals_to_trajectory(std_gaussian_pair, spec, 256, seed=5)
        iid = convert.marginals_to_trajectory(std_gaussian_pair, Independence(), 256, seed=5)
        for k in range(2):
            assert np.allclose(np.sort(u_ens.paths[:, k]), np.sort(iid.paths[:, k]))

    def test_roundtrip_comonotonic_reproduces_grid(self):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        meta = HorizonMeta(0, 2)
        vals = np.vstack([
            dists.quantile(dists.Gaussian(0, 1), levels),
            dists.quantile(dists.Gaussian(1, 2), levels),
        ])
        qf = QuantileForecast(meta, levels, vals)
        with pytest.warns(TailAssumptionWarning):
            ens = convert.marginals_to_trajectory(qf, Comonotonic(), 40000, seed=17)
        back = convert.traj_to_quantile(ens, levels)
        assert np.allclose(back.values, vals, atol=0.05)


class TestMomentMatch:
    def test_exact_recovery(self):
        # z_{0.25} = -z_{0.75}; frozen from the numerical Gaussian inverse
        z75 = stats.norm.ppf(0.75)
        assert z75 == pytest.approx(0.67449, abs=1e-5)
        meta = HorizonMeta(0, 1)
        qf = QuantileForecast(meta, [0.25, 0.75], [[-z75, z75]])
        fit = convert.quantile_to_parametric_moment_match(qf, (0.25, 0.75))
        assert fit.params[0].mu == pytest.approx(0.0, abs=1e-10)
        assert fit.params[0].sigma == pytest.approx(1.0, abs=1e-10)

    def test_zero_spread_rejected(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.25, 0.75], [[1.0, 1.0]])
        with pytest.raises(InputError, match="non-increasing"):
            convert.quantile_to_parametric_moment_match(qf, (0.25, 0.75))

    def test_repeated_level_underdetermined(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.25, 0.5, 0.75], [[-1.0, 0.0, 1.0]])
        with pytest.raises(InputError, match="underdetermined"):
            convert.quantile_to_parametric_moment_match(qf, (0.5, 0.5))


class TestQuantileRegression:
    def test_gaussian_roundtrip(self):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        truth = dists.Gaussian(2.0, 3.0)
        qf = QuantileForecast(
            HorizonMeta(0, 1), levels, dists.quantile(truth, levels)[None, :]
        )
        fit, objective = convert.quantile_to_parametric_regression(qf, "gaussian")
        assert fit.params[0].mu == pytest.approx(2.0, abs=1e-6)
        assert fit.params[0].sigma == pytest.approx(3.0, abs=1e-6)
        assert objective[0] < 1e-12

    def test_weight_modes_agree_on_exact_quantiles(self):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        qf = QuantileForecast(
            HorizonMeta(0, 1), levels,
            dists.quantile(dists.Gaussian(2.0, 3.0), levels)[None, :],
        )
        eq, _ = convert.quantile_to_parametric_regression(qf, "gaussian", "equal")
        asym, _ = convert.quantile_to_parametric_regression(qf, "gaussian", "asymptotic", 4)
        assert eq.params[0].mu == pytest.approx(asym.params[0].mu, abs=1e-6)
        assert eq.params[0].sigma == pytest.approx(asym.params[0].sigma, abs=1e-6)

    def test_underdetermined_student_t(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.25, 0.75], [[-1.0, 1.0]])
        with pytest.raises(InputError, match="underdetermined"):
            convert.quantile_to_parametric_regression(qf, "student_t")

    def test_student_t_roundtrip(self):
        levels = np.round(np.arange(0.05, 0.951, 0.05), 10)
        truth = dists.StudentT(1.0, 2.0, 5.0)
        qf = QuantileForecast(
            HorizonMeta(0, 1), levels, dists.quantile(truth, levels)[None, :]
        )
        fit, objective = convert.quantile_to_parametric_regression(qf, "student_t")
        assert fit.params[0].mu == pytest.approx(1.0, abs=1e-4)
        assert fit.params[0].sigma == pytest.approx(2.0, abs=1e-3)
        assert fit.params[0].nu == pytest.approx(5.0, rel=0.01)


class TestInterpolatedCdf:
    def test_linear_midpoint(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.1, 0.9], [[1.0, 3.0]])
        p = convert.quantile_to_interpolated_cdf(qf)
        assert dists.quantile(p.params[0], 0.5) == pytest.approx(2.0)

    def test_no_tails_refuses_outside_grid(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.1, 0.9], [[1.0, 3.0]])
        p = convert.quantile_to_interpolated_cdf(qf)
        with pytest.raises(InputError, match="tail quer"):
            dists.quantile(p.params[0], 0.95)

    def test_gpd_tails_extend_monotonically(self):
        levels = np.round(np.arange(0.05, 0.951, 0.05), 10)
        row = dists.quantile(dists.Gaussian(0, 1), levels)
        qf = QuantileForecast(HorizonMeta(0, 1), levels, row[None, :])
        p = convert.quantile_to_interpolated_cdf(qf, tails=GPDTailSettings())
        q99 = dists.quantile(p.params[0], 0.99)
        assert np.isfinite(q99)
        assert q99 > row[-1]

    def test_crossing_rejected(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.1, 0.9], [[3.0, 1.0]])
        with pytest.raises(InputError, match="crossing"):
            convert.quantile_to_interpolated_cdf(qf)


class TestQuantileToPoint:
    def test_median_direct_read(self, gaussian_quantile_grid):
        pt = convert.quantile_to_point(gaussian_quantile_grid, "median")
        assert pt.values[0] == pytest.approx(0.0, abs=1e-12)

    def test_mean_symmetric_grid_is_zero(self, gaussian_quantile_grid):
        with pytest.warns(TailAssumptionWarning):
            pt = convert.quantile_to_point(gaussian_quantile_grid, "mean")
        assert pt.values[0] == pytest.approx(0.0, abs=1e-12)

    def test_uniform_endpoint_extension(self):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        qf = QuantileForecast(HorizonMeta(0, 1), levels, levels[None, :])
        with pytest.warns(TailAssumptionWarning):
            pt = convert.quantile_to_point(qf, "mean")
        assert pt.values[0] == pytest.approx(0.5, abs=1e-12)

    def test_median_outside_hull(self):
        qf = QuantileForecast(HorizonMeta(0, 1), [0.6, 0.9], [[1.0, 2.0]])
        with pytest.raises(InputError, match="median"):
            convert.quantile_to_point(qf, "median")


def _point_cal(meta, residual_rows):
    forecast = PointForecast(meta, np.zeros(meta.horizon))
    records = [
        (PointForecast(meta, np.zeros(meta.horizon)), row) for row in residual_rows
    ]
    return forecast, CalibrationSet(records)


class TestConformal:
    def test_order_statistic_rank(self, meta2):
        # residuals {1,2,3,4} at each step, alpha=0.2 -> 4th smallest = 4
        rows = [[r, -r] for r in (1.0, 2.0, 3.0, 4.0)]
        f, cal = _point_cal(meta2, rows)
        ivs = convert.point_to_intervals_conformal(f, cal, ConformalConfig(alpha=0.2))
        assert ivs.upper.tolist() == [4.0, 4.0]
        assert ivs.lower.tolist() == [-4.0, -4.0]

    def test_zero_residuals_zero_width(self, meta2):
        f, cal = _point_cal(meta2, [[0.0, 0.0]] * 10)
        ivs = convert.point_to_intervals_conformal(f, cal, ConformalConfig(alpha=0.3))
        assert np.all(ivs.lower == ivs.upper)

    def test_alpha_too_small_for_n(self, meta2):
        f, cal = _point_cal(meta2, [[1.0, 1.0]] * 4)
        with pytest.raises(InputError, match="rank"):
            convert.point_to_intervals_conformal(f, cal, ConformalConfig(alpha=0.01))

    def test_pathwise_scores_rank(self, meta2):
        rows = [[r, 0.0] for r in (1.0, 2.0, 3.0, 4.0)]
        f, cal = _point_cal(meta2, rows)
        cfg = ConformalConfig(alpha=0.2, mode="pathwise_sup_norm",
                              scale_weights=np.ones(2))
        band = convert.point_to_band_conformal_pathwise(f, cal, cfg)
        assert band.multiplier == pytest.approx(4.0)

    def test_single_identical_path_degenerate(self, meta2):
        f, cal = _point_cal(meta2, [[0.0, 0.0]])
        cfg = ConformalConfig(alpha=0.5, mode="pathwise_sup_norm")
        band = convert.point_to_band_conformal_pathwise(f, cal, cfg)
        assert band.multiplier == 0.0

    def test_band_covers_calibration_paths(self, meta3):
        rng = np.random.default_rng(15)
        rows = rng.standard_normal((40, 3)).tolist()
        f, cal = _point_cal(meta3, rows)
        alpha = 0.2
        cfg = ConformalConfig(alpha=alpha, mode="pathwise_sup_norm")
        band = convert.point_to_band_conformal_pathwise(f, cal, cfg)
        inside = [
            np.all((row >= band.lower) & (row <= band.upper))
            for _, row in cal.records
        ]
        n = len(rows)
        assert sum(inside) >= np.ceil((1 - alpha) * n)


class TestBootstrap:
    def test_zero_pool_reproduces_forecast(self, meta2):
        f, cal = _point_cal(meta2, [[0.0, 0.0]] * 5)
        ens = convert.point_to_trajectory_bootstrap(f, cal, 20, seed=1)
        assert np.allclose(ens.paths, 0.0)

    def test_symmetric_pool_mean(self, meta2):
        rows = [[-1.0, -1.0], [1.0, 1.0]]
        f, cal = _point_cal(meta2, rows)
        ens = convert.point_to_trajectory_bootstrap(f, cal, 10000, seed=2, stratify="by_lead")
        assert np.allclose(ens.paths.mean(axis=0), 0.0, atol=0.02)

    def test_by_lead_spread_matches_pool(self, meta2):
        rng = np.random.default_rng(3)
        rows = np.column_stack([rng.normal(0, 1.0, 400), rng.normal(0, 3.0, 400)])
        f, cal = _point_cal(meta2, rows.tolist())
        ens = convert.point_to_trajectory_bootstrap(f, cal, 20000, seed=4, stratify="by_lead")
        pool_sd = rows.std(axis=0)
        boot_sd = ens.paths.std(axis=0)
        assert np.all(np.abs(boot_sd / pool_sd - 1.0) < 0.05)

    def test_row_mode_preserves_within_window_dependence(self, meta2):
        rows = [[-1.0, -1.0], [1.0, 1.0]]
        f, cal = _point_cal(meta2, rows)
        ens = convert.point_to_trajectory_bootstrap(f, cal, 500, seed=5, stratify="rows")
        assert np.allclose(ens.paths[:, 0], ens.paths[:, 1])

    def test_empty_cal_rejected(self, meta2):
        f = PointForecast(meta2, [0.0, 0.0])
        with pytest.raises(InputError, match="empty"):
            convert.point_to_trajectory_bootstrap(f, CalibrationSet([]), 10, seed=0)


class TestRoundTripInvariant:
    def test_parametric_quantile_regression_roundtrip(self):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        meta = HorizonMeta(0, 2)
        truth = ParametricForecast(
            meta, "gaussian", [dists.Gaussian(1.0, 0.5), dists.Gaussian(-2.0, 4.0)]
        )
        grid = convert.parametric_to_quantile(truth, levels)
        back, _ = convert.quantile_to_parametric_regression(grid, "gaussian")
        for a, b in zip(truth.params, back.params):
            assert b.mu == pytest.approx(a.mu, abs=1e-6)
            assert b.sigma == pytest.approx(a.sigma, abs=1e-6)
