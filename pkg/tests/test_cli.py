import json

import numpy as np
import pytest

from fforms import dists, io
from fforms.cli import main
from fforms.core import (
    CalibrationSet,
    HorizonMeta,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
)


@pytest.fixture
def gaussian_file(tmp_path):
    meta = HorizonMeta(0, 2)
    doc = ParametricForecast(
        meta, "gaussian", [dists.Gaussian(0.0, 1.0), dists.Gaussian(0.0, 1.0)]
    )
    path = tmp_path / "gauss.json"
    io.save_document(doc, path)
    return path


@pytest.fixture
def trajectory_file(tmp_path):
    rng = np.random.default_rng(0)
    doc = TrajectoryEnsemble(HorizonMeta(0, 2), rng.standard_normal((64, 2)))
    path = tmp_path / "traj.json"
    io.save_document(doc, path)
    return path


@pytest.fixture
def point_file(tmp_path):
    doc = PointForecast(HorizonMeta(0, 2), [0.0, 0.0])
    path = tmp_path / "point.json"
    io.save_document(doc, path)
    return path


@pytest.fixture
def cal_file(tmp_path):
    rng = np.random.default_rng(1)
    meta = HorizonMeta(0, 2)
    cal = CalibrationSet([
        (PointForecast(meta, [0.0, 0.0]), rng.standard_normal(2)) for _ in range(60)
    ])
    path = tmp_path / "cal.json"
    io.save_calibration(cal, path)
    return path


class TestValidateCommand:
    def test_ok_document(self, gaussian_file, capsys):
        assert main(["validate", str(gaussian_file)]) == 0
        assert "ok" in capsys.readouterr().out

    def test_violations_exit_2(self, tmp_path, capsys):
        bad = {"type": "quantile", "origin": 0, "horizon": 1,
               "levels": [0.5, 0.1], "values": [[1.0, 2.0]]}
        path = tmp_path / "bad.json"
        path.write_text(json.dumps(bad))
        assert main(["validate", str(path)]) == 2
        assert "levels not ascending" in capsys.readouterr().out


class TestConvertCommand:
    def test_traj_to_quantile(self, trajectory_file, tmp_path):
        out = tmp_path / "q.json"
        rc = main(["convert", str(trajectory_file), "--to", "quantile",
                   "--levels", "0.1,0.5,0.9", "--out", str(out)])
        assert rc == 0
        doc = io.load_document(out)
        assert isinstance(doc, QuantileForecast)
        assert doc.levels.tolist() == [0.1, 0.5, 0.9]

    def test_upward_without_copula_exit_4(self, gaussian_file, tmp_path, capsys):
        rc = main(["convert", str(gaussian_file), "--to", "trajectory",
                   "--paths", "10", "--seed", "1",
                   "--out", str(tmp_path / "t.json")])
        assert rc == 4
        assert "dependence assumptions" in capsys.readouterr().err

    def test_upward_without_seed_refused(self, gaussian_file, tmp_path, capsys):
        rc = main(["convert", str(gaussian_file), "--to", "trajectory",
                   "--copula", '{"copula": "independence"}', "--paths", "10",
                   "--out", str(tmp_path / "t.json")])
        assert rc == 2
        assert "--seed" in capsys.readouterr().err

    def test_copula_lift_and_assumption_notice(self, gaussian_file, tmp_path, capsys):
        out = tmp_path / "t.json"
        rc = main(["convert", str(gaussian_file), "--to", "trajectory",
                   "--copula", '{"copula": "gaussian_ar1", "rho": 0.5}',
                   "--paths", "32", "--seed", "7", "--out", str(out)])
        assert rc == 0
        assert "imposing temporal dependence" in capsys.readouterr().err
        doc = io.load_document(out)
        assert isinstance(doc, TrajectoryEnsemble)
        assert doc.paths.shape == (32, 2)

    def test_point_conformal_interval_document(self, point_file, cal_file, tmp_path):
        out = tmp_path / "iv.json"
        rc = main(["convert", str(point_file), "--to", "quantile",
                   "--cal", str(cal_file), "--alpha", "0.1", "--out", str(out)])
        assert rc == 0
        doc = io.load_document(out)
        assert doc.levels.tolist() == [0.05, 0.95]
        assert np.all(doc.values[:, 0] <= doc.values[:, 1])

    def test_point_without_cal_exit_4(self, point_file, tmp_path):
        rc = main(["convert", str(point_file), "--to", "quantile",
                   "--out", str(tmp_path / "x.json")])
        assert rc == 4

    def test_point_bootstrap_trajectory(self, point_file, cal_file, tmp_path):
        out = tmp_path / "boot.json"
        rc = main(["convert", str(point_file), "--to", "trajectory",
                   "--cal", str(cal_file), "--paths", "20", "--seed", "3",
                   "--out", str(out)])
        assert rc == 0
        assert io.load_document(out).paths.shape == (20, 2)

    def test_quantile_moment_match(self, tmp_path):
        z = dists.quantile(dists.Gaussian(0, 1), np.array([0.25, 0.75]))
        doc = QuantileForecast(HorizonMeta(0, 1), [0.25, 0.75], z[None, :])
        src = tmp_path / "q.json"
        io.save_document(doc, src)
        out = tmp_path / "p.json"
        rc = main(["convert", str(src), "--to", "parametric", "--method", "moment",
                   "--level-pair", "0.25,0.75", "--out", str(out)])
        assert rc == 0
        fitted = io.load_document(out)
        assert fitted.params[0].mu == pytest.approx(0.0, abs=1e-10)
        assert fitted.params[0].sigma == pytest.approx(1.0, abs=1e-10)


class TestTaskCommand:
    def test_event_on_point_exit_3(self, point_file, tmp_path, capsys):
        rc = main(["task", "event", str(point_file), "--threshold", "0",
                   "--out", str(tmp_path / "e.json")])
        assert rc == 3
        assert "unsuitable" in capsys.readouterr().err

    def test_var_order_statistic(self, tmp_path):
        # ten loss paths: losses 1..10 (single-step negated values)
        paths = -np.arange(1.0, 11.0)[:, None]
        doc = TrajectoryEnsemble(HorizonMeta(0, 1), paths)
        src = tmp_path / "losses.json"
        io.save_document(doc, src)
        out = tmp_path / "var.json"
        rc = main(["task", "var", str(src), "--alpha", "0.05", "--out", str(out)])
        assert rc == 0
        assert json.loads(out.read_text())["value_at_risk"] == 10.0

    def test_crossing_parametric_tagged(self, gaussian_file, tmp_path, capsys):
        out = tmp_path / "cross.json"
        rc = main(["task", "crossing", str(gaussian_file), "--threshold", "0",
                   "--comparator", "ge", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["provenance"]["independence_approximation"] is True
        assert data["survival"] == pytest.approx([0.5, 0.25])
        assert "independence approximation" in capsys.readouterr().err

    def test_event_marginal_with_copula(self, gaussian_file, tmp_path):
        out = tmp_path / "event.json"
        rc = main(["task", "event", str(gaussian_file), "--functional", "max",
                   "--comparator", "le", "--threshold", "0",
                   "--copula", '{"copula": "comonotonic"}',
                   "--paths", "20000", "--seed", "5", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["probability"] == pytest.approx(0.5, abs=0.02)
        assert data["provenance"]["copula"]["copula"] == "comonotonic"

    def test_band_on_trajectory(self, trajectory_file, tmp_path):
        out = tmp_path / "band.json"
        rc = main(["task", "band", str(trajectory_file), "--alpha", "0.2",
                   "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert len(data["lower"]) == 2

    def test_aggregate_distribution_closed_form(self, gaussian_file, tmp_path):
        out = tmp_path / "agg.json"
        rc = main(["task", "aggregate", str(gaussian_file), "--window", "1-2",
                   "--output", "distribution",
                   "--copula", '{"copula": "independence"}', "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["distribution"]["family"] == "gaussian"
        assert data["distribution"]["sigma"] == pytest.approx(np.sqrt(2.0))

    def test_scenario_with_losses(self, trajectory_file, tmp_path):
        losses = tmp_path / "losses.csv"
        with open(losses, "w") as fh:
            fh.write("path,loss\n")
            for i in range(64):
                fh.write(f"{i},{float(i)}\n")
        out = tmp_path / "scen.json"
        rc = main(["task", "scenario", str(trajectory_file), "--threshold", "0.5",
                   "--losses", str(losses), "--mode", "clustered", "--k", "3",
                   "--seed", "2", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert len(data["ranking"]["clusters"]) == 3
        assert data["ranking"]["order"][0] == 63


class TestEvalCommand:
    def test_crps_on_quantile_flagged_approximate(self, tmp_path):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        doc = QuantileForecast(
            HorizonMeta(0, 2), levels,
            np.vstack([dists.quantile(dists.Gaussian(0, 1), levels)] * 2),
        )
        f = tmp_path / "q.json"
        io.save_document(doc, f)
        actuals = tmp_path / "act.csv"
        io.save_actuals_csv({"w0": np.array([0.1, -0.2])}, actuals)
        out = tmp_path / "report.json"
        rc = main(["eval", "--forecast", str(f), "--actuals", str(actuals),
                   "--metrics", "crps,wis", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["crps"]["approximate"] is True
        assert data["metrics"]["wis"] > 0

    def test_energy_on_point_exit_3(self, point_file, tmp_path, capsys):
        actuals = tmp_path / "act.csv"
        io.save_actuals_csv({"w0": np.array([0.0, 0.0])}, actuals)
        rc = main(["eval", "--forecast", str(point_file), "--actuals", str(actuals),
                   "--metrics", "energy"])
        assert rc == 3
        assert "trajectory" in capsys.readouterr().err

    def test_point_metrics(self, point_file, tmp_path):
        actuals = tmp_path / "act.csv"
        io.save_actuals_csv({"w0": np.array([1.0, -1.0])}, actuals)
        out = tmp_path / "report.json"
        rc = main(["eval", "--forecast", str(point_file), "--actuals", str(actuals),
                   "--metrics", "mae,mse", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["mae"] == 1.0
        assert data["metrics"]["mse"] == 1.0


class TestTaskCommandMore:
    def test_interval_on_point_with_cal(self, point_file, cal_file, tmp_path, capsys):
        out = tmp_path / "iv.json"
        rc = main(["task", "interval", str(point_file), "--alpha", "0.2",
                   "--cal", str(cal_file), "--out", str(out)])
        assert rc == 0
        assert "conformal" in capsys.readouterr().err
        data = json.loads(out.read_text())
        assert data["provenance"]["method"] == "split_conformal_per_step"

    def test_interval_on_point_without_cal_exit_4(self, point_file, tmp_path):
        rc = main(["task", "interval", str(point_file), "--alpha", "0.2",
                   "--out", str(tmp_path / "iv.json")])
        assert rc == 4

    def test_band_on_point_with_cal(self, point_file, cal_file, tmp_path):
        out = tmp_path / "band.json"
        rc = main(["task", "band", str(point_file), "--alpha", "0.2",
                   "--cal", str(cal_file), "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["provenance"]["method"] == "split_conformal_pathwise_sup_norm"

    def test_band_sidak_on_parametric(self, gaussian_file, tmp_path, capsys):
        out = tmp_path / "band.json"
        rc = main(["task", "band", str(gaussian_file), "--alpha", "0.19",
                   "--correction", "sidak", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["provenance"]["per_step_alpha"] == pytest.approx(0.1)
        assert "conservative" in capsys.readouterr().err

    def test_crossing_with_copula_lift(self, gaussian_file, tmp_path):
        out = tmp_path / "cross.json"
        rc = main(["task", "crossing", str(gaussian_file), "--threshold", "0",
                   "--comparator", "ge",
                   "--copula", '{"copula": "comonotonic"}',
                   "--paths", "20000", "--seed", "9", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        # comonotonic: one shared uniform, so S(2) = S(1) = 1/2
        assert data["survival"][0] == pytest.approx(0.5, abs=0.02)
        assert data["survival"][1] == pytest.approx(0.5, abs=0.02)
        assert data["provenance"]["copula"]["copula"] == "comonotonic"


class TestConvertCommandMore:
    def test_quantile_regression_method(self, tmp_path, capsys):
        levels = np.round(np.arange(0.1, 0.91, 0.1), 10)
        doc = QuantileForecast(
            HorizonMeta(0, 1), levels,
            dists.quantile(dists.Gaussian(2.0, 3.0), levels)[None, :],
        )
        src = tmp_path / "q.json"
        io.save_document(doc, src)
        out = tmp_path / "p.json"
        rc = main(["convert", str(src), "--to", "parametric", "--method", "regression",
                   "--family", "gaussian", "--out", str(out)])
        assert rc == 0
        fitted = io.load_document(out)
        assert fitted.params[0].mu == pytest.approx(2.0, abs=1e-6)
        assert "objective" in capsys.readouterr().err

    def test_quantile_interpolate_with_gpd_tails(self, tmp_path, capsys):
        levels = np.round(np.arange(0.05, 0.951, 0.05), 10)
        doc = QuantileForecast(
            HorizonMeta(0, 1), levels,
            dists.quantile(dists.Gaussian(0.0, 1.0), levels)[None, :],
        )
        src = tmp_path / "q.json"
        io.save_document(doc, src)
        out = tmp_path / "p.json"
        rc = main(["convert", str(src), "--to", "parametric", "--method", "interpolate",
                   "--tails", "gpd", "--out", str(out)])
        assert rc == 0
        assert "GPD tails" in capsys.readouterr().err
        fitted = io.load_document(out)
        assert fitted.family == "spliced_gpd"


class TestEvalCommandMore:
    def test_mase_with_training(self, point_file, tmp_path):
        actuals = tmp_path / "act.csv"
        io.save_actuals_csv({"w0": np.array([1.0, -1.0])}, actuals)
        from fforms.core import HistorySeries

        training = tmp_path / "train.csv"
        io.save_history_csv(HistorySeries([0.0, 2.0, 0.0, 2.0]), training)
        out = tmp_path / "rep.json"
        rc = main(["eval", "--forecast", str(point_file), "--actuals", str(actuals),
                   "--metrics", "mase", "--training", str(training), "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["mase"] == pytest.approx(0.5)  # mae 1 / naive 2

    def test_coverage_and_log_score(self, gaussian_file, tmp_path):
        actuals = tmp_path / "act.csv"
        io.save_actuals_csv({"w0": np.array([0.0, 0.0]), "w1": np.array([5.0, 0.0])}, actuals)
        out = tmp_path / "rep.json"
        rc = main(["eval", "--forecast", str(gaussian_file), "--actuals", str(actuals),
                   "--metrics", "coverage,log_score", "--alpha", "0.1", "--out", str(out)])
        assert rc == 0
        data = json.loads(out.read_text())
        assert data["metrics"]["coverage"] == pytest.approx(0.75)
        assert data["metrics"]["log_score"] > 0


class TestGoldenEval:
    def test_full_suite_matches_golden_report(self, tmp_path):
        import pathlib

        data = pathlib.Path(__file__).parent / "data"
        out = tmp_path / "report.json"
        rc = main([
            "eval",
            "--forecast", str(data / "sample_trajectory.json"),
            "--actuals", str(data / "sample_actuals.csv"),
            "--metrics", "crps,energy,variogram,coverage,pit",
            "--alpha", "0.2", "--step", "2", "--seed", "1234",
            "--out", str(out),
        ])
        assert rc == 0
        assert out.read_bytes() == (data / "golden_eval.json").read_bytes()
        assert (tmp_path / "report.json.pit_step2.csv").read_bytes() == (
            data / "golden_eval.json.pit_step2.csv"
        ).read_bytes()


class TestSynthCommand:
    def test_writes_all_files(self, tmp_path):
        prefix = tmp_path / "run"
        rc = main(["synth", "--rho", "0.8", "--n", "200", "--h", "5",
                   "--windows", "10", "--seed", "11", "--out-prefix", str(prefix)])
        assert rc == 0
        for suffix in ("_history.csv", "_actuals.csv", "_truth.json", "_calibration.json"):
            assert (tmp_path / f"run{suffix}").exists()
        truth = json.loads((tmp_path / "run_truth.json").read_text())
        assert truth["rho"] == 0.8
        assert len(truth["windows"]) == 10

    def test_requires_seed(self, tmp_path, capsys):
        rc = main(["synth", "--rho", "0.5", "--out-prefix", str(tmp_path / "x")])
        assert rc == 2
        assert "--seed" in capsys.readouterr().err

    def test_rho_bound(self, tmp_path):
        rc = main(["synth", "--rho", "1.0", "--seed", "1",
                   "--out-prefix", str(tmp_path / "x")])
        assert rc == 2

    def test_lag1_autocorrelation(self, tmp_path):
        prefix = tmp_path / "ac"
        main(["synth", "--rho", "0.8", "--n", "10000", "--h", "2",
              "--windows", "1", "--seed", "21", "--out-prefix", str(prefix)])
        hist = io.load_history_csv(tmp_path / "ac_history.csv")
        y = hist.values
        r = np.corrcoef(y[:-1], y[1:])[0, 1]
        assert r == pytest.approx(0.8, abs=0.02)


class TestReproducibility:
    def test_synth_bytes_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for prefix in (a, b):
            main(["synth", "--rho", "0.6", "--n", "100", "--h", "4",
                  "--windows", "5", "--seed", "9", "--out-prefix", str(prefix)])
        for suffix in ("_history.csv", "_actuals.csv", "_truth.json", "_calibration.json"):
            assert (tmp_path / f"a{suffix}").read_bytes() == (
                tmp_path / f"b{suffix}"
            ).read_bytes()

    def test_convert_bytes_identical(self, gaussian_file, tmp_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            main(["convert", str(gaussian_file), "--to", "trajectory",
                  "--copula", '{"copula": "student_t", "R": [[1.0, 0.4], [0.4, 1.0]], "nu": 4}',
                  "--paths", "100", "--seed", "33", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_task_bytes_identical(self, gaussian_file, tmp_path):
        outs = []
        for name in ("e1.json", "e2.json"):
            out = tmp_path / name
            main(["task", "event", str(gaussian_file), "--functional", "max",
                  "--comparator", "le", "--threshold", "0",
                  "--copula", '{"copula": "independence"}',
                  "--paths", "5000", "--seed", "4", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_matches_in_memory_conversion(self, trajectory_file, tmp_path):
        out = tmp_path / "q.json"
        main(["convert", str(trajectory_file), "--to", "quantile",
              "--levels", "0.2,0.5,0.8", "--out", str(out)])
        from fforms import convert

        src = io.load_document(trajectory_file)
        expected = convert.traj_to_quantile(src, [0.2, 0.5, 0.8])
        assert io.load_document(out) == expected


class TestDemoCommand:
    def test_prop3_deterministic(self, capsys):
        assert main(["demo", "prop3"]) == 0
        out = capsys.readouterr().out
        assert "rejected" in out

    def test_prop2_small(self, capsys):
        assert main(["demo", "prop2", "--paths", "20000", "--seed", "1"]) == 0
        assert "comonotonic" in capsys.readouterr().out

    def test_demo_requires_seed(self, capsys):
        assert main(["demo", "prop2"]) == 2
        assert "--seed" in capsys.readouterr().err


class TestThreadCapEnv:
    def test_invalid_cap_rejected(self, gaussian_file, monkeypatch, capsys):
        monkeypatch.setenv("FFORMS_THREADS", "zero")
        assert main(["validate", str(gaussian_file)]) == 2
        assert "FFORMS_THREADS" in capsys.readouterr().err

    def test_valid_cap_accepted(self, gaussian_file, monkeypatch):
        monkeypatch.setenv("FFORMS_THREADS", "4")
        assert main(["validate", str(gaussian_file)]) == 0
