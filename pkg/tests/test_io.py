import json

import numpy as np
import pytest

from fforms import dists, io
from fforms.copulas import ECC, GaussianAR1, GaussianFull, Independence
from fforms.core import (
    CalibrationSet,
    HistorySeries,
    HorizonMeta,
    InputError,
    ParametricForecast,
    PointForecast,
    QuantileForecast,
    TrajectoryEnsemble,
    validate,
)


def _documents():
    meta = HorizonMeta(origin=7, horizon=2, step_labels=("a", "b"))
    yield PointForecast(meta, [1.5, -2.25])
    yield QuantileForecast(meta, [0.1, 0.5, 0.9], [[-1.0, 0.0, 1.0], [0.0, 1.0, 2.0]])
    yield ParametricForecast(
        meta, "gaussian", [dists.Gaussian(0.25, 1.0), dists.Gaussian(-1.0, 2.5)]
    )
    yield ParametricForecast(
        meta, "student_t", [dists.StudentT(0.0, 1.0, 4.0), dists.StudentT(1.0, 2.0, 7.5)]
    )
    yield ParametricForecast(
        meta, "empirical",
        [dists.EmpiricalInterpolant([0.1, 0.9], [0.0, 1.0])] * 2,
    )
    yield ParametricForecast(
        meta, "spliced_gpd",
        [dists.SplicedGPDTails(
            body=dists.EmpiricalInterpolant([0.1, 0.9], [0.0, 1.0]),
            lower=dists.GPDTail(0.1, 1.0, 0.1),
            upper=dists.GPDTail(-0.2, 2.0, 0.9),
        )] * 2,
    )
    yield TrajectoryEnsemble(meta, [[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]])
    yield TrajectoryEnsemble(meta, [[0.0, 1.0], [2.0, 3.0]], weights=[0.25, 0.75])


@pytest.mark.parametrize("doc", list(_documents()), ids=lambda d: repr(d))
def test_serialize_parse_roundtrip(doc):
    assert io.parse_document(io.serialize_document(doc)) == doc


def test_schema_keys_point():
    doc = PointForecast(HorizonMeta(3, 2), [1.0, 2.0])
    data = io.document_to_json(doc)
    assert data == {"type": "point", "origin": 3, "horizon": 2, "values": [1.0, 2.0]}


def test_schema_keys_quantile():
    doc = QuantileForecast(HorizonMeta(0, 1), [0.1, 0.9], [[1.0, 3.0]])
    data = io.document_to_json(doc)
    assert set(data) == {"type", "origin", "horizon", "levels", "values"}
    assert data["values"] == [[1.0, 3.0]]


def test_schema_keys_gaussian_record():
    doc = ParametricForecast(HorizonMeta(0, 1), "gaussian", [dists.Gaussian(1.0, 2.0)])
    data = io.document_to_json(doc)
    assert data["family"] == "gaussian"
    assert data["params"] == [{"mu": 1.0, "sigma": 2.0}]


def test_invalid_documents_parse_then_fail_validation():
    text = json.dumps({
        "type": "quantile", "origin": 0, "horizon": 1,
        "levels": [0.5, 0.1], "values": [[2.0, 1.0]],
    })
    doc = io.parse_document(text)  # must not raise
    assert not validate(doc).ok


def test_malformed_json_rejected():
    with pytest.raises(InputError, match="malformed"):
        io.parse_document("{nope")


def test_missing_keys_rejected():
    with pytest.raises(InputError, match="horizon"):
        io.parse_document(json.dumps({"type": "point", "origin": 0, "values": [1.0]}))


def test_unknown_type_rejected():
    with pytest.raises(InputError, match="unknown forecast type"):
        io.parse_document(json.dumps({"type": "wavelet", "origin": 0, "horizon": 1}))


def test_serialization_deterministic():
    doc = next(_documents())
    assert io.serialize_document(doc) == io.serialize_document(doc)


class TestHistoryCsv:
    def test_roundtrip(self, tmp_path):
        h = HistorySeries([1.0, -2.5, 3.25])
        path = tmp_path / "hist.csv"
        io.save_history_csv(h, path)
        assert io.load_history_csv(path) == h
        assert path.read_text().splitlines()[0] == "t,value"

    def test_header_required(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,y\n1,2\n")
        with pytest.raises(InputError, match="header"):
            io.load_history_csv(path)


class TestActualsCsv:
    def test_roundtrip(self, tmp_path):
        windows = {"w0": np.array([1.0, 2.0]), "w1": np.array([3.0, 4.0])}
        path = tmp_path / "actuals.csv"
        io.save_actuals_csv(windows, path)
        back = io.load_actuals_csv(path)
        assert set(back) == {"w0", "w1"}
        assert np.array_equal(back["w1"], windows["w1"])


class TestCopulaJson:
    def test_named_specs_roundtrip(self):
        specs = [
            Independence(),
            GaussianAR1(0.4),
            GaussianFull([[1.0, 0.2], [0.2, 1.0]]),
        ]
        for spec in specs:
            back = io.copula_from_json(io.copula_to_json(spec))
            assert back.describe() == spec.describe()

    def test_ecc_roundtrip(self):
        ref = TrajectoryEnsemble(HorizonMeta(0, 2), [[0.0, 1.0], [1.0, 0.0]])
        spec = ECC(reference=ref, variant="Q")
        back = io.copula_from_json(io.copula_to_json(spec))
        assert isinstance(back, ECC)
        assert back.variant == "Q"
        assert np.array_equal(back.reference.paths, ref.paths)

    def test_unknown_copula(self):
        with pytest.raises(InputError, match="unknown copula"):
            io.copula_from_json({"copula": "vine"})


class TestCalibrationJson:
    def test_roundtrip(self, tmp_path):
        meta = HorizonMeta(0, 2)
        cal = CalibrationSet([
            (PointForecast(meta, [0.0, 1.0]), [0.5, 1.5]),
            (PointForecast(meta, [1.0, 2.0]), [1.0, 2.0]),
        ])
        path = tmp_path / "cal.json"
        io.save_calibration(cal, path)
        back = io.load_calibration(path)
        assert len(back) == 2
        assert back.records[0][0] == cal.records[0][0]
        assert np.array_equal(back.records[1][1], cal.records[1][1])
