"""Command-line front end.

Subcommands: ``validate``, ``convert``, ``task``, ``eval``, ``synth``
and ``demo``.  Exit codes are a stable scripting contract: 0 success,
2 validation/input error, 3 unsupported task/forecast pair, 4 missing
assumption input.  Stochastic commands refuse to run without an
explicit ``--seed``, and any conversion or task that imposes a copula,
tail model or independence approximation prints a one-line notice to
stderr and records it in the output provenance.
"""

from __future__ import annotations

import argparse
import json
import os
import pathlib
import sys

import numpy as np

from fforms import convert, demos, dists, io, metrics, synth, tasks
from fforms.copulas import Independence
from fforms.core import (
    CalibrationSet,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
    validate,
)
from fforms.errors import (
    ForecastError,
    InputError,
    MissingAssumptionError,
    UnsupportedError,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_UNSUPPORTED = 3
EXIT_MISSING_ASSUMPTION = 4


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _check_thread_cap()
        return args.handler(args)
    except MissingAssumptionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING_ASSUMPTION
    except UnsupportedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ForecastError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def _check_thread_cap() -> None:
    raw = os.environ.get("FFORMS_THREADS")
    if raw is None:
        return
    try:
        cap = int(raw)
    except ValueError as exc:
        raise InputError(f"FFORMS_THREADS must be an integer, got {raw!r}") from exc
    if cap < 1:
        raise InputError("FFORMS_THREADS must be >= 1")
    # all operations currently run on a single thread, which trivially
    # respects any cap; the variable is validated so typos fail loudly


def _note(message: str) -> None:
    print(f"note: {message}", file=sys.stderr)


def _write_json(data: dict, out: str | None) -> None:
    text = json.dumps(data, sort_keys=True, indent=1) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        pathlib.Path(out).write_text(text)


def _parse_levels(raw: str) -> np.ndarray:
    try:
        return np.asarray([float(x) for x in raw.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise InputError(f"cannot parse levels {raw!r}") from exc


def _parse_window(raw: str) -> tuple[int, ...]:
    try:
        parts = [p.strip() for p in raw.split(",") if p.strip() != ""]
        if len(parts) == 1 and "-" in parts[0]:
            a, b = parts[0].split("-")
            return tuple(range(int(a), int(b) + 1))
        return tuple(int(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"cannot parse window {raw!r} (use '1,2,3' or '1-3')") from exc


def _parse_copula(raw: str):
    path = pathlib.Path(raw)
    if path.exists():
        text = path.read_text()
    else:
        text = raw
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"--copula must be a JSON file or inline JSON object ({exc})"
        ) from exc
    return io.copula_from_json(data)


def _require_seed(args) -> int:
    if getattr(args, "seed", None) is None:
        raise InputError("this command is stochastic: an explicit --seed is required")
    return args.seed


def _tail_settings(args):
    if not getattr(args, "tails", None):
        return None
    if args.tails != "gpd":
        raise InputError(f"--tails supports 'gpd', got {args.tails!r}")
    lo = hi = None
    if getattr(args, "tail_attach", None):
        try:
            lo, hi = (float(x) for x in args.tail_attach.split(","))
        except ValueError as exc:
            raise InputError("--tail-attach expects 'low,high'") from exc
    return convert.GPDTailSettings(lower_attach=lo, upper_attach=hi)


# ---------------------------------------------------------------------------
# validate
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    report = validate(io.load_document(args.input))
    if report.ok:
        print("ok")
        return EXIT_OK
    for issue in report.issues:
        print(f"violation: {issue}")
    return EXIT_INPUT


# ---------------------------------------------------------------------------
# convert
# ---------------------------------------------------------------------------

def cmd_convert(args) -> int:
    doc = io.load_document(args.input)
    target = args.to
    source = doc.kind
    if source == target:
        out_doc = doc
    elif isinstance(doc, TrajectoryEnsemble):
        out_doc = _convert_from_trajectory(doc, target, args)
    elif isinstance(doc, ParametricForecast):
        out_doc = _convert_from_parametric(doc, target, args)
    elif isinstance(doc, QuantileForecast):
        out_doc = _convert_from_quantile(doc, target, args)
    elif isinstance(doc, PointForecast):
        out_doc = _convert_from_point(doc, target, args)
    else:
        raise UnsupportedError(f"cannot convert a {source} document")
    if args.out:
        io.save_document(out_doc, args.out)
    else:
        sys.stdout.write(io.serialize_document(out_doc))
    return EXIT_OK


def _convert_from_trajectory(doc, target, args):
    if target == "quantile":
        if not args.levels:
            raise InputError("trajectory -> quantile needs --levels")
        return convert.traj_to_quantile(doc, _parse_levels(args.levels))
    if target == "parametric":
        if not args.family:
            raise InputError("trajectory -> parametric needs --family")
        _note(f"fitting the {args.family} family per step; misspecification risk is yours")
        return convert.traj_to_parametric(doc, args.family)
    if target == "point":
        return convert.traj_to_point(doc, args.statistic)
    raise UnsupportedError(f"no conversion trajectory -> {target}")


def _convert_from_parametric(doc, target, args):
    if target == "quantile":
        if not args.levels:
            raise InputError("parametric -> quantile needs --levels")
        return convert.parametric_to_quantile(doc, _parse_levels(args.levels))
    if target == "point":
        return convert.parametric_to_point(doc, args.statistic)
    if target == "trajectory":
        copula = _copula_for_upward(args)
        seed = _require_seed(args)
        _note(f"imposing temporal dependence: {copula.describe()}")
        return convert.marginals_to_trajectory(
            doc, copula, args.paths, seed, strict_tails=args.strict_tails
        )
    raise UnsupportedError(f"no conversion parametric -> {target}")


def _convert_from_quantile(doc, target, args):
    if target == "parametric":
        method = args.method or "interpolate"
        if method == "moment":
            if not args.level_pair:
                raise InputError("moment matching needs --level-pair q1,q2")
            q1, q2 = (float(x) for x in args.level_pair.split(","))
            return convert.quantile_to_parametric_moment_match(doc, (q1, q2))
        if method == "regression":
            family = args.family or dists.GAUSSIAN
            fitted, objective = convert.quantile_to_parametric_regression(
                doc, family, weight_mode=args.weight_mode, iterations=args.iterations
            )
            _note(f"quantile regression objective per step: {objective.round(6).tolist()}")
            return fitted
        if method == "interpolate":
            settings = _tail_settings(args)
            if settings is not None:
                _note("extending the grid with fitted GPD tails (a parametric assumption)")
            return convert.quantile_to_interpolated_cdf(doc, tails=settings)
        raise InputError(f"--method must be moment, regression or interpolate, got {method!r}")
    if target == "point":
        return convert.quantile_to_point(doc, args.statistic, tails=_tail_settings(args))
    if target == "trajectory":
        copula = _copula_for_upward(args)
        seed = _require_seed(args)
        _note(f"imposing temporal dependence: {copula.describe()}")
        return convert.marginals_to_trajectory(
            doc, copula, args.paths, seed,
            tails=_tail_settings(args), strict_tails=args.strict_tails,
        )
    raise UnsupportedError(f"no conversion quantile -> {target}")


def _convert_from_point(doc, target, args):
    if target == "quantile":
        cal = _load_cal(args)
        cfg = convert.ConformalConfig(alpha=args.alpha, mode="per_step")
        intervals = convert.point_to_intervals_conformal(doc, cal, cfg)
        _note(
            f"split-conformal intervals at alpha={args.alpha}: coverage holds under "
            "exchangeability of the calibration windows"
        )
        levels = np.asarray([args.alpha / 2.0, 1.0 - args.alpha / 2.0])
        values = np.column_stack([intervals.lower, intervals.upper])
        return QuantileForecast(meta=doc.meta, levels=levels, values=values)
    if target == "trajectory":
        cal = _load_cal(args)
        seed = _require_seed(args)
        _note(
            f"residual bootstrap ({args.stratify}): paths inherit the calibration "
            "residual distribution"
        )
        return convert.point_to_trajectory_bootstrap(
            doc, cal, args.paths, seed, stratify=args.stratify
        )
    raise UnsupportedError(
        f"no conversion point -> {target}; point forecasts calibrate to "
        "quantile intervals (--cal) or bootstrap to trajectories"
    )


def _copula_for_upward(args):
    if not args.copula:
        raise MissingAssumptionError(
            "conversion toward trajectories requires dependence assumptions: "
            "supply --copula (the marginals do not identify a joint)"
        )
    return _parse_copula(args.copula)


def _load_cal(args) -> CalibrationSet:
    if not args.cal:
        raise MissingAssumptionError(
            "point forecasts carry no uncertainty: supply --cal with "
            "calibration (forecast, realization) records"
        )
    return io.load_calibration(args.cal)


# ---------------------------------------------------------------------------
# task
# ---------------------------------------------------------------------------

def cmd_task(args) -> int:
    doc = io.load_document(args.input)
    handler = {
        "interval": _task_interval,
        "band": _task_band,
        "event": _task_event,
        "var": _task_var,
        "crossing": _task_crossing,
        "aggregate": _task_aggregate,
        "scenario": _task_scenario,
    }[args.task]
    result = handler(doc, args)
    _write_json(result, args.out)
    return EXIT_OK


def _base_provenance(doc, args) -> dict:
    prov = {"source_type": doc.kind}
    if getattr(args, "seed", None) is not None:
        prov["seed"] = args.seed
    if getattr(args, "paths", None) is not None:
        prov["n_paths"] = args.paths
    return prov


def _task_interval(doc, args) -> dict:
    if isinstance(doc, PointForecast):
        cal = _load_cal(args)
        cfg = convert.ConformalConfig(alpha=args.alpha, mode="per_step")
        ivs = convert.point_to_intervals_conformal(doc, cal, cfg)
        _note("point input: intervals come from split-conformal calibration")
    else:
        ivs = tasks.pointwise_intervals(doc, args.alpha)
    prov = {**_base_provenance(doc, args), **ivs.provenance}
    return {
        "task": "interval",
        "alpha": args.alpha,
        "lower": ivs.lower.tolist(),
        "upper": ivs.upper.tolist(),
        "provenance": prov,
    }


def _task_band(doc, args) -> dict:
    if isinstance(doc, TrajectoryEnsemble):
        band = tasks.pathwise_band_from_trajectory(doc, args.alpha, args.center_scale)
    elif isinstance(doc, PointForecast):
        cal = _load_cal(args)
        cfg = convert.ConformalConfig(alpha=args.alpha, mode="pathwise_sup_norm")
        band = convert.point_to_band_conformal_pathwise(doc, cal, cfg)
        _note("point input: band comes from pathwise sup-norm conformal calibration")
    else:
        band = tasks.band_sidak(doc, args.alpha, correction=args.correction)
        _note(
            f"{args.correction} band from marginal intervals; simultaneous "
            "coverage is conservative (exact only under per-step independence)"
        )
    prov = {**_base_provenance(doc, args), **band.provenance}
    return {
        "task": "band",
        "alpha": args.alpha,
        "center": band.center.tolist(),
        "scale": band.scale.tolist(),
        "multiplier": band.multiplier,
        "lower": band.lower.tolist(),
        "upper": band.upper.tolist(),
        "provenance": prov,
    }


def _event_spec(args, horizon) -> tasks.EventSpec:
    window = _parse_window(args.window) if args.window else tuple(range(1, horizon + 1))
    comparator = {"ge": ">=", "le": "<="}[args.comparator]
    return tasks.EventSpec(
        window=window, functional=args.functional,
        comparator=comparator, threshold=args.threshold,
    )


def _task_event(doc, args) -> dict:
    tasks.require_feasible("event_probability", doc)
    spec = _event_spec(args, doc.meta.horizon)
    if isinstance(doc, TrajectoryEnsemble):
        res = tasks.event_probability(doc, spec)
    else:
        copula = _copula_for_upward(args)
        seed = _require_seed(args)
        _note(f"lifting marginals through {copula.describe()} before Monte Carlo")
        res = tasks.event_probability_marginal(
            doc, spec, copula, args.paths, seed, strict_tails=args.strict_tails
        )
    prov = {**_base_provenance(doc, args), **res.provenance}
    return {
        "task": "event",
        "event": {
            "window": list(spec.window), "functional": spec.functional,
            "comparator": spec.comparator, "threshold": spec.threshold,
        },
        "probability": res.probability,
        "standard_error": res.standard_error,
        "provenance": prov,
    }


def _task_var(doc, args) -> dict:
    tasks.require_feasible("event_probability", doc)
    if isinstance(doc, TrajectoryEnsemble):
        ens = doc
        prov = _base_provenance(doc, args)
    else:
        copula = _copula_for_upward(args)
        seed = _require_seed(args)
        _note(f"lifting marginals through {copula.describe()} before the loss quantile")
        ens = convert.marginals_to_trajectory(
            doc, copula, args.paths, seed, strict_tails=args.strict_tails
        )
        prov = {**_base_provenance(doc, args), "copula": copula.describe(),
                "dependence_assumed": True}
    value = tasks.value_at_risk(ens, args.alpha)
    out = {
        "task": "var", "alpha": args.alpha, "value_at_risk": value,
        "provenance": prov,
    }
    if args.threshold is not None:
        out["loss_exceedance_probability"] = tasks.loss_exceedance_probability(
            ens, args.threshold
        )
        out["loss_threshold"] = args.threshold
    return out


def _task_crossing(doc, args) -> dict:
    tasks.require_feasible("threshold_crossing", doc)
    direction = {"ge": ">=", "le": "<="}[args.comparator]
    if isinstance(doc, TrajectoryEnsemble):
        est = tasks.survival_from_trajectories(doc, args.threshold, direction)
        curve, pmf = est.curve, est.hitting_pmf
    elif args.copula:
        copula = _parse_copula(args.copula)
        seed = _require_seed(args)
        _note(f"lifting marginals through {copula.describe()} for the crossing law")
        ens = convert.marginals_to_trajectory(
            doc, copula, args.paths, seed, strict_tails=args.strict_tails
        )
        est = tasks.survival_from_trajectories(ens, args.threshold, direction)
        curve, pmf = est.curve, est.hitting_pmf
        curve.provenance.update({"copula": copula.describe(), "dependence_assumed": True})
    else:
        curve = tasks.survival_from_marginals(doc, args.threshold, direction)
        pmf = curve.hitting_pmf()
        _note(
            "independence approximation: per-step crossing probabilities are "
            "multiplied, which ignores path history"
        )
    hazard = tasks.hazard_from_survival(curve)
    prov = {**_base_provenance(doc, args), **curve.provenance}
    return {
        "task": "crossing",
        "threshold": args.threshold,
        "direction": direction,
        "survival": curve.survival.tolist(),
        "hitting_pmf": np.asarray(pmf).tolist(),
        "censored_mass": curve.censored_mass,
        "hazard": hazard.tolist(),
        "provenance": prov,
    }


def _task_aggregate(doc, args) -> dict:
    window = _parse_window(args.window) if args.window else tuple(
        range(1, doc.meta.horizon + 1)
    )
    copula = _parse_copula(args.copula) if args.copula else None
    seed = args.seed
    if copula is not None and not isinstance(copula, Independence):
        seed = _require_seed(args)
    if copula is not None:
        _note(f"window-sum distribution under {copula.describe()}")
    agg = tasks.window_aggregate(
        doc, window, output=args.output, copula=copula,
        n_paths=args.paths, seed=seed,
    )
    out = {
        "task": "aggregate", "window": list(window), "output": args.output,
        "mean": agg.mean, "provenance": {**_base_provenance(doc, args), **agg.provenance},
    }
    if args.output == "distribution":
        if agg.gaussian is not None:
            out["distribution"] = {"family": "gaussian", "mu": agg.gaussian.mu,
                                   "sigma": agg.gaussian.sigma}
        else:
            qs = [0.05, 0.25, 0.5, 0.75, 0.95]
            out["distribution"] = {
                "family": "empirical",
                "quantiles": {str(q): agg.quantile(q) for q in qs},
                "n_samples": int(agg.samples.size),
            }
    return out


def _task_scenario(doc, args) -> dict:
    tasks.require_feasible("scenario_generation", doc)
    if isinstance(doc, TrajectoryEnsemble):
        ens = doc
        prov = _base_provenance(doc, args)
    else:
        copula = _copula_for_upward(args)
        seed = _require_seed(args)
        _note(f"sampling scenarios through {copula.describe()}")
        ens = convert.marginals_to_trajectory(
            doc, copula, args.paths, seed, strict_tails=args.strict_tails
        )
        prov = {**_base_provenance(doc, args), "copula": copula.describe(),
                "dependence_assumed": True}
    if args.threshold is None:
        raise InputError("task scenario needs --threshold for the exceedance functional")
    funcs = tasks.scenario_functionals(ens, args.threshold)
    out = {
        "task": "scenario",
        "threshold": args.threshold,
        "functionals": {
            "peak": funcs.peak.tolist(),
            "exceedance": funcs.exceedance.tolist(),
            "cumulative": funcs.cumulative.tolist(),
        },
        "provenance": prov,
    }
    if args.losses:
        losses = _load_losses(args.losses, ens.n_paths)
        ranking = tasks.scenario_rank(
            ens, losses, mode=args.mode, k=args.k,
            seed=args.seed, threshold=args.threshold,
        )
        out["ranking"] = {
            "mode": args.mode,
            "order": ranking.order.tolist(),
            "scores": ranking.scores.tolist(),
        }
        if ranking.clusters is not None:
            out["ranking"]["clusters"] = [
                {"medoid": c.medoid_index, "weight": c.weight,
                 "mean_loss": c.mean_loss, "loss_q95": c.loss_q95,
                 "members": list(c.member_indices)}
                for c in ranking.clusters
            ]
        curve = ranking.exceedance_curve
        out["ranking"]["exceedance_curve"] = {
            "loss": curve.losses.tolist(),
            "probability_above": [float(curve(x)) for x in curve.losses],
        }
    return out


def _load_losses(path: str, n_paths: int) -> np.ndarray:
    rows = io._read_csv(path, ("path", "loss"))
    losses = np.full(n_paths, np.nan)
    for r in rows:
        losses[int(r["path"])] = float(r["loss"])
    if np.any(np.isnan(losses)):
        raise InputError(f"losses file must cover all {n_paths} paths")
    return losses


# ---------------------------------------------------------------------------
# eval
# ---------------------------------------------------------------------------

_POINT_ONLY = {"mae", "mse", "mase"}


def cmd_eval(args) -> int:
    actuals = io.load_actuals_csv(args.actuals)
    window_ids = sorted(actuals)
    docs = [io.load_document(p) for p in args.forecast]
    if len(docs) == 1:
        docs = docs * len(window_ids)
    if len(docs) != len(window_ids):
        raise InputError(
            f"{len(args.forecast)} forecast files for {len(window_ids)} actual windows"
        )
    batch = metrics.EvaluationBatch(
        [(doc, actuals[wid]) for doc, wid in zip(docs, window_ids)]
    )
    requested = [m.strip() for m in args.metrics.split(",") if m.strip()]
    out: dict = {"n_windows": batch.n, "metrics": {}}
    training = io.load_history_csv(args.training) if args.training else None
    for name in requested:
        out["metrics"][name] = _eval_metric(name, batch, args, training)
    _write_json(out, args.out)
    return EXIT_OK


def _eval_metric(name: str, batch: metrics.EvaluationBatch, args, training):
    kinds = {doc.kind for doc, _ in batch.records}
    if name in _POINT_ONLY:
        if kinds != {"point"}:
            raise UnsupportedError(
                f"{name} is a point-accuracy metric; got {sorted(kinds)} forecasts"
            )
        errs = metrics.point_errors(batch, training if name == "mase" else None)
        if name == "mase" and "mase" not in errs:
            raise InputError("mase needs --training with the training series")
        return errs[name]
    if name == "wis":
        if kinds != {"quantile"}:
            raise UnsupportedError("wis applies to quantile forecasts")
        vals = [metrics.wis(doc, real) for doc, real in batch.records]
        return float(np.mean(vals))
    if name == "crps":
        if "point" in kinds:
            raise UnsupportedError("CRPS needs a probabilistic forecast; got point")
        results = [metrics.crps(doc, real) for doc, real in batch.records]
        return {
            "mean": float(np.mean([r.mean for r in results])),
            "per_step": np.mean([r.per_step for r in results], axis=0).tolist(),
            "approximate": any(r.approximate for r in results),
        }
    if name == "energy":
        if kinds != {"trajectory"}:
            raise UnsupportedError(
                "the energy score evaluates joint paths; it needs trajectory forecasts"
            )
        return float(np.mean([
            metrics.energy_score(doc, real) for doc, real in batch.records
        ]))
    if name == "variogram":
        if kinds != {"trajectory"}:
            raise UnsupportedError(
                "the variogram score evaluates joint paths; it needs trajectory forecasts"
            )
        return float(np.mean([
            metrics.variogram_score(doc, real) for doc, real in batch.records
        ]))
    if name == "log_score":
        if kinds != {"parametric"}:
            raise UnsupportedError("log_score needs parametric forecasts")
        return float(np.mean([
            metrics.log_score(doc, real) for doc, real in batch.records
        ]))
    if name == "coverage":
        if args.alpha is None:
            raise InputError("coverage needs --alpha")
        rates = []
        for doc, real in batch.records:
            ivs = tasks.pointwise_intervals(doc, args.alpha)
            rates.append(metrics.coverage(ivs, real, mode="pointwise"))
        return float(np.mean(rates))
    if name == "pit":
        step = args.step or 1
        pit = metrics.pit_values(batch, step, seed=args.seed)
        if args.out:
            csv_path = str(args.out) + f".pit_step{step}.csv"
            with open(csv_path, "w") as fh:
                fh.write("index,pit\n")
                for i, v in enumerate(pit.values):
                    fh.write(f"{i},{v!r}\n")
        return {"step": step, "ks_distance": pit.ks_distance,
                "n_clipped": pit.n_clipped}
    raise InputError(f"unknown metric {name!r}")


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(args) -> int:
    seed = _require_seed(args)
    if args.model != "ar1":
        raise InputError(f"unknown model {args.model!r}")
    history = synth.ar1_series(args.rho, args.n, seed)
    windows = synth.ar1_windows(args.rho, args.h, args.windows, seed + 1)
    prefix = pathlib.Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)

    io.save_history_csv(history, f"{prefix}_history.csv")
    io.save_actuals_csv(
        {w.window_id: w.realization for w in windows}, f"{prefix}_actuals.csv"
    )
    truth = {
        "model": "ar1", "rho": args.rho, "horizon": args.h, "seed": seed,
        "windows": [
            {"id": w.window_id, "y0": w.y0, "mean": w.mean.tolist(),
             "cov": w.cov.tolist()}
            for w in windows
        ],
    }
    pathlib.Path(f"{prefix}_truth.json").write_text(
        json.dumps(truth, sort_keys=True, indent=1) + "\n"
    )
    cal = CalibrationSet(
        [(synth.true_point_forecast(w), w.realization) for w in windows]
    )
    io.save_calibration(cal, f"{prefix}_calibration.json")
    print(
        f"wrote {prefix}_history.csv, {prefix}_actuals.csv, "
        f"{prefix}_truth.json, {prefix}_calibration.json"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# demo
# ---------------------------------------------------------------------------

def cmd_demo(args) -> int:
    if args.which == "prop3":
        report, _ = demos.demo_prop3()
    else:
        seed = _require_seed(args)
        if args.which == "prop1":
            report, _ = demos.demo_prop1(seed, n_paths=args.paths or 10000)
        elif args.which == "prop2":
            report, _ = demos.demo_prop2(seed, n_paths=args.paths or 100000)
        elif args.which == "persistence":
            report, _ = demos.demo_persistence(seed, n_paths=args.paths or 200000)
        else:
            report, _ = demos.demo_dependence(seed)
    print(report)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fforms",
        description="Forecast forms: validation, conversion, operational tasks, "
                    "evaluation, synthetic data and demos.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a forecast document's invariants")
    p.add_argument("input")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("convert", help="convert a forecast document to another form")
    p.add_argument("input")
    p.add_argument("--to", required=True,
                   choices=["point", "quantile", "parametric", "trajectory"])
    p.add_argument("--out")
    p.add_argument("--levels", help="comma-separated quantile levels")
    p.add_argument("--statistic", default="mean", choices=["mean", "median"])
    p.add_argument("--family", choices=list(dists.FAMILIES))
    p.add_argument("--method", choices=["moment", "regression", "interpolate"])
    p.add_argument("--level-pair", help="two levels for moment matching, e.g. 0.25,0.75")
    p.add_argument("--weight-mode", default="equal", choices=["equal", "asymptotic"])
    p.add_argument("--iterations", type=int, default=3)
    p.add_argument("--tails", help="'gpd' to splice GPD tails onto a quantile grid")
    p.add_argument("--tail-attach", help="attach levels 'low,high' for --tails gpd")
    p.add_argument("--copula", help="copula JSON (file or inline)")
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.add_argument("--strict-tails", action="store_true")
    p.add_argument("--cal", help="calibration records JSON (for point uplift)")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--stratify", default="rows", choices=["rows", "by_lead", "pooled"])
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("task", help="run an operational task on a forecast")
    p.add_argument("task", choices=["interval", "band", "event", "var",
                                    "crossing", "aggregate", "scenario"])
    p.add_argument("input")
    p.add_argument("--out")
    p.add_argument("--alpha", type=float, default=0.1)
    p.add_argument("--center-scale", default="median_mad",
                   choices=["median_mad", "mean_sd"])
    p.add_argument("--correction", default="sidak", choices=["sidak", "bonferroni"])
    p.add_argument("--window", help="steps as '1,2,3' or '1-3' (default: whole horizon)")
    p.add_argument("--functional", default="max",
                   choices=["sum", "max", "min", "first_crossing"])
    p.add_argument("--comparator", default="ge", choices=["ge", "le"])
    p.add_argument("--threshold", type=float)
    p.add_argument("--output", default="mean", choices=["mean", "distribution"])
    p.add_argument("--copula", help="copula JSON (file or inline)")
    p.add_argument("--paths", type=int, default=10000)
    p.add_argument("--seed", type=int)
    p.add_argument("--strict-tails", action="store_true")
    p.add_argument("--cal", help="calibration records JSON (point inputs)")
    p.add_argument("--losses", help="per-path losses CSV with header path,loss")
    p.add_argument("--mode", default="per_path", choices=["per_path", "clustered"])
    p.add_argument("--k", type=int)
    p.set_defaults(handler=cmd_task)

    p = sub.add_parser("eval", help="score forecasts against actuals")
    p.add_argument("--forecast", nargs="+", required=True)
    p.add_argument("--actuals", required=True, help="CSV window_id,t,value")
    p.add_argument("--metrics", required=True,
                   help="comma list: mae,mse,mase,wis,crps,energy,variogram,"
                        "log_score,coverage,pit")
    p.add_argument("--training", help="history CSV for MASE scaling")
    p.add_argument("--alpha", type=float)
    p.add_argument("--step", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("synth", help="generate AR(1) data with known truth")
    p.add_argument("--model", default="ar1")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--n", type=int, default=500, help="history length")
    p.add_argument("--h", type=int, default=10, help="window horizon")
    p.add_argument("--windows", type=int, default=100)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("demo", help="run a built-in demonstration")
    p.add_argument("which", choices=["prop1", "prop2", "prop3",
                                     "persistence", "dependence"])
    p.add_argument("--paths", type=int)
    p.add_argument("--seed", type=int)
    p.set_defaults(handler=cmd_demo)

    return parser


if __name__ == "__main__":
    sys.exit(main())
