"""JSON and CSV interchange for forecast documents and related inputs.

Parsing is shape-strict but invariant-permissive: a structurally sound
document with bad values (crossed quantiles, negative scales) parses
fine and is reported on by :func:`fforms.core.validate`; nothing is
silently repaired.  Serialization is deterministic (sorted keys, full
float precision), so identical documents produce identical bytes.
"""

from __future__ import annotations

import csv
import json
import pathlib

import numpy as np

from fforms import dists
from fforms.copulas import (
    ECC,
    Comonotonic,
    CopulaSpec,
    Countermonotonic,
    GaussianAR1,
    GaussianFull,
    Independence,
    StudentTCopula,
)
from fforms.core import (
    CalibrationSet,
    ForecastDocument,
    HistorySeries,
    HorizonMeta,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
)
from fforms.errors import InputError


# ---------------------------------------------------------------------------
# Forecast documents <-> JSON
# ---------------------------------------------------------------------------

def document_to_json(doc: ForecastDocument) -> dict:
    out = {"type": doc.kind, "origin": int(doc.meta.origin), "horizon": int(doc.meta.horizon)}
    if doc.meta.step_labels is not None:
        out["step_labels"] = list(doc.meta.step_labels)
    if isinstance(doc, PointForecast):
        out["values"] = doc.values.tolist()
    elif isinstance(doc, QuantileForecast):
        out["levels"] = doc.levels.tolist()
        out["values"] = doc.values.tolist()
    elif isinstance(doc, ParametricForecast):
        out["family"] = doc.family
        out["params"] = [_params_to_json(p) for p in doc.params]
    elif isinstance(doc, TrajectoryEnsemble):
        out["paths"] = doc.paths.tolist()
        if doc.weights is not None:
            out["weights"] = doc.weights.tolist()
    else:
        raise InputError(f"cannot serialize {type(doc).__name__}")
    return out


def document_from_json(data: dict) -> ForecastDocument:
    if not isinstance(data, dict):
        raise InputError("forecast document must be a JSON object")
    kind = data.get("type")
    for key in ("origin", "horizon"):
        if key not in data:
            raise InputError(f"forecast document is missing the {key!r} key")
    labels = data.get("step_labels")
    meta = HorizonMeta(
        origin=int(data["origin"]),
        horizon=int(data["horizon"]),
        step_labels=None if labels is None else tuple(str(s) for s in labels),
    )
    try:
        if kind == "point":
            return PointForecast(meta=meta, values=data["values"])
        if kind == "quantile":
            return QuantileForecast(meta=meta, levels=data["levels"], values=data["values"])
        if kind == "parametric":
            family = data["family"]
            params = [_params_from_json(family, rec) for rec in data["params"]]
            return ParametricForecast(meta=meta, family=family, params=params)
        if kind == "trajectory":
            return TrajectoryEnsemble(meta=meta, paths=data["paths"], weights=data.get("weights"))
    except KeyError as exc:
        raise InputError(f"forecast document is missing the {exc.args[0]!r} key") from exc
    raise InputError(f"unknown forecast type {kind!r}")


def _params_to_json(params) -> dict:
    if isinstance(params, dists.Gaussian):
        return {"mu": params.mu, "sigma": params.sigma}
    if isinstance(params, dists.StudentT):
        return {"mu": params.mu, "sigma": params.sigma, "nu": params.nu}
    if isinstance(params, dists.EmpiricalInterpolant):
        return {"probs": params.probs.tolist(), "values": params.values.tolist()}
    if isinstance(params, dists.SplicedGPDTails):
        return {
            "body": _params_to_json(params.body),
            "lower": _gpd_to_json(params.lower),
            "upper": _gpd_to_json(params.upper),
        }
    raise InputError(f"cannot serialize parameter record {type(params).__name__}")


def _gpd_to_json(tail: dists.GPDTail | None) -> dict | None:
    if tail is None:
        return None
    return {"xi": tail.xi, "beta": tail.beta, "attach_prob": tail.attach_prob}


def _params_from_json(family: str, rec: dict):
    try:
        if family == dists.GAUSSIAN:
            return dists.Gaussian(mu=float(rec["mu"]), sigma=float(rec["sigma"]))
        if family == dists.STUDENT_T:
            return dists.StudentT(
                mu=float(rec["mu"]), sigma=float(rec["sigma"]), nu=float(rec["nu"])
            )
        if family == dists.EMPIRICAL:
            return dists.EmpiricalInterpolant(probs=rec["probs"], values=rec["values"])
        if family == dists.SPLICED_GPD:
            body = _params_from_json(dists.EMPIRICAL, rec["body"])
            return dists.SplicedGPDTails(
                body=body,
                lower=_gpd_from_json(rec.get("lower")),
                upper=_gpd_from_json(rec.get("upper")),
            )
    except KeyError as exc:
        raise InputError(
            f"{family} parameter record is missing the {exc.args[0]!r} key"
        ) from exc
    raise InputError(f"unknown family {family!r}")


def _gpd_from_json(rec: dict | None) -> dists.GPDTail | None:
    if rec is None:
        return None
    return dists.GPDTail(
        xi=float(rec["xi"]), beta=float(rec["beta"]), attach_prob=float(rec["attach_prob"])
    )


def serialize_document(doc: ForecastDocument) -> str:
    return json.dumps(document_to_json(doc), sort_keys=True, indent=1) + "\n"


def parse_document(text: str) -> ForecastDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc}") from exc
    return document_from_json(data)


def save_document(doc: ForecastDocument, path) -> None:
    pathlib.Path(path).write_text(serialize_document(doc))


def load_document(path) -> ForecastDocument:
    return parse_document(pathlib.Path(path).read_text())


# ---------------------------------------------------------------------------
# Copula specs <-> JSON
# ---------------------------------------------------------------------------

def copula_from_json(data: dict) -> CopulaSpec:
    if not isinstance(data, dict) or "copula" not in data:
        raise InputError("copula spec must be a JSON object with a 'copula' key")
    name = data["copula"]
    try:
        if name == "independence":
            return Independence()
        if name == "comonotonic":
            return Comonotonic()
        if name == "countermonotonic":
            return Countermonotonic()
        if name == "gaussian_ar1":
            return GaussianAR1(rho=float(data["rho"]))
        if name == "gaussian_full":
            return GaussianFull(correlation=data["R"])
        if name == "student_t":
            return StudentTCopula(correlation=data["R"], nu=float(data["nu"]))
        if name == "ecc":
            reference = document_from_json(data["reference"])
            if not isinstance(reference, TrajectoryEnsemble):
                raise InputError("ECC reference must be a trajectory document")
            return ECC(reference=reference, variant=data.get("variant", "R"))
    except KeyError as exc:
        raise InputError(f"copula spec is missing the {exc.args[0]!r} key") from exc
    raise InputError(f"unknown copula {name!r}")


def copula_to_json(spec: CopulaSpec) -> dict:
    out = spec.describe()
    if isinstance(spec, ECC):
        out = {"copula": "ecc", "variant": spec.variant,
               "reference": document_to_json(spec.reference)}
    return out


# ---------------------------------------------------------------------------
# Calibration sets <-> JSON
# ---------------------------------------------------------------------------

def calibration_to_json(cal: CalibrationSet) -> dict:
    return {
        "records": [
            {"forecast": document_to_json(fc), "realization": real.tolist()}
            for fc, real in cal.records
        ]
    }


def calibration_from_json(data: dict) -> CalibrationSet:
    if not isinstance(data, dict) or "records" not in data:
        raise InputError("calibration JSON needs a 'records' list")
    records = []
    for rec in data["records"]:
        records.append((document_from_json(rec["forecast"]), rec["realization"]))
    return CalibrationSet(records)


def save_calibration(cal: CalibrationSet, path) -> None:
    pathlib.Path(path).write_text(
        json.dumps(calibration_to_json(cal), sort_keys=True, indent=1) + "\n"
    )


def load_calibration(path) -> CalibrationSet:
    try:
        data = json.loads(pathlib.Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed calibration JSON: {exc}") from exc
    return calibration_from_json(data)


# ---------------------------------------------------------------------------
# CSV: history and actuals
# ---------------------------------------------------------------------------

def save_history_csv(history: HistorySeries, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "value"])
        for t, v in enumerate(history.values, start=1):
            writer.writerow([t, repr(float(v))])


def load_history_csv(path) -> HistorySeries:
    rows = _read_csv(path, ("t", "value"))
    rows.sort(key=lambda r: int(r["t"]))
    return HistorySeries(values=[float(r["value"]) for r in rows])


def save_actuals_csv(windows: dict, path) -> None:
    """Write realizations in long form: window_id,t,value."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["window_id", "t", "value"])
        for wid in sorted(windows):
            for t, v in enumerate(np.asarray(windows[wid], dtype=float), start=1):
                writer.writerow([wid, t, repr(float(v))])


def load_actuals_csv(path) -> dict:
    """Read long-form realizations into {window_id: array of h values}."""
    rows = _read_csv(path, ("window_id", "t", "value"))
    grouped: dict[str, list[tuple[int, float]]] = {}
    for r in rows:
        grouped.setdefault(r["window_id"], []).append((int(r["t"]), float(r["value"])))
    out = {}
    for wid, pairs in grouped.items():
        pairs.sort()
        out[wid] = np.asarray([v for _, v in pairs])
    return out


def _read_csv(path, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or any(c not in reader.fieldnames for c in required):
            raise InputError(f"CSV {path} must have header columns {','.join(required)}")
        return list(reader)
