import json

import pytest

from nnabs.analyzer import AnalysisConfig, analyze
from nnabs.errors import HintsSchemaError
from nnabs.hints import export_hints, hints_from_report, import_hints, parse_hints, write_hints
from nnabs.network import FullyConnected, InputRegion, Network, RobustnessQuery, build_region

SYMBOX = AnalysisConfig("box", True)
Q_A = RobustnessQuery([5, 3.5], 1.0)  # gives the box [4,6] x [2.5,4.5]


def straddle_hints(net):
    # the fixture box is not an L-inf ball; the query only supplies the metadata
    q = RobustnessQuery([5, 4.75], 1.0)
    region = InputRegion([4.0, 4.5], [6.0, 5.0])
    return hints_from_report(analyze(net, region, SYMBOX), net, q)


def test_wide_records(tiny_net, wide_region):
    h = hints_from_report(analyze(tiny_net, wide_region, SYMBOX), tiny_net, Q_A)
    assert [r.phase for r in h.neurons] == ["active", "active"]
    assert len(h.decided()) == 2
    assert h.model_sha256 == tiny_net.sha256()


def test_straddle_records(tiny_net):
    h = straddle_hints(tiny_net)
    assert [r.phase for r in h.neurons] == ["active", "uncertain"]
    r = h.neurons[1]
    assert (r.layer, r.index, r.pre_lo, r.pre_hi) == (1, 1, -1.0, 1.5)


def test_round_trip_byte_identical(tiny_net, tmp_path):
    h = straddle_hints(tiny_net)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    write_hints(h, p1)
    back = import_hints(p1)
    write_hints(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert back == h


def test_export_writes_file(tiny_net, wide_region, tmp_path):
    p = tmp_path / "h.json"
    export_hints(analyze(tiny_net, wide_region, SYMBOX), tiny_net, Q_A, p)
    doc = json.loads(p.read_text())
    assert doc["version"] == "nnabs-hints-v1" and len(doc["neurons"]) == 2


def test_no_hidden_relu_gives_empty_list():
    net = Network((2,), [FullyConnected([[1, 1]], [0], relu=False)])
    q = RobustnessQuery([0, 0], 0.1)
    h = hints_from_report(analyze(net, build_region(q)), net, q)
    assert h.neurons == []
    assert parse_hints(json.loads(h.dumps())).neurons == []


def _doc(**rec):
    base = {"layer": 1, "index": 0, "pre_lo": 1.0, "pre_hi": 2.0, "phase": "active"}
    base.update(rec)
    return {"version": "nnabs-hints-v1", "model_sha256": "00",
            "region": {"kind": "linf", "delta": 0.1, "x0_sha256": "00"}, "neurons": [base]}


@pytest.mark.parametrize("rec", [
    {"phase": "maybe"},
    {"pre_lo": 3.0},
    {"pre_lo": -1.0},
    {"phase": "inactive"},
    {"layer": 0},
    {"index": -1},
    {"index": 1.5},
    {"pre_hi": float("nan")},
    {"pre_hi": "2"},
])
def test_schema_errors_carry_record_index(rec):
    with pytest.raises(HintsSchemaError) as err:
        parse_hints(_doc(**rec))
    assert err.value.record_index == 0


def test_schema_top_level_errors(tmp_path):
    good = _doc()
    parse_hints(good)
    for key, val in [("version", "v0"), ("neurons", {}), ("region", {"kind": "l2", "delta": 0.1})]:
        bad = dict(good, **{key: val})
        with pytest.raises(HintsSchemaError):
            parse_hints(bad)
    dup = _doc()
    dup["neurons"] = dup["neurons"] * 2
    with pytest.raises(HintsSchemaError) as err:
        parse_hints(dup)
    assert err.value.record_index == 1
    p = tmp_path / "x.json"
    p.write_text("{")
    with pytest.raises(HintsSchemaError):
        import_hints(p)
