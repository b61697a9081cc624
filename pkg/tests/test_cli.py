import json

import pytest

from nnabs.cli import run


@pytest.fixture
def args(data_dir):
    return ["--model", str(data_dir / "tiny_net_two_outputs.json"), "--input", str(data_dir / "tiny_center.csv")]


def test_verify_robust_exit0(args, capsys):
    assert run(["verify", *args, "--delta", "1.0", "--domain", "box", "--symprop", "on"]) == 0
    assert "Verified" in capsys.readouterr().out


def test_verify_unknown_exit1(args, capsys):
    assert run(["verify", *args, "--delta", "50"]) == 1
    assert "Unknown" in capsys.readouterr().out


def test_usage_errors_exit2(args, data_dir, tmp_path, capsys):
    assert run(["verify", *args]) == 2                      # missing --delta
    assert run(["verify", *args, "--delta", "1", "--domain", "polyhedra"]) == 2
    assert run(["verify", "--model", str(tmp_path / "none.json"), "--input", args[3], "--delta", "1"]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2,3\n")
    assert run(["verify", "--model", args[1], "--input", str(bad), "--delta", "1"]) == 2
    assert run(["hints", *args, "--delta", "1"]) == 2       # hints needs --out
    assert "error" in capsys.readouterr().err


def test_analyze_writes_report(args, tmp_path, capsys):
    out = tmp_path / "r.json"
    assert run(["analyze", *args, "--delta", "1.0", "--samples", "200", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["soundness"] == {"samples": 200, "violations": 0}
    assert "0 of 200" in capsys.readouterr().out


def test_reports_identical_across_runs(args, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(["verify", *args, "--delta", "1.0", "--domain", "zono", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_compare_table(data_dir, capsys, tmp_path):
    out = tmp_path / "c.json"
    rc = run(["compare", "--model", str(data_dir / "small_cnn.json"),
              "--input", str(data_dir / "small_cnn_input.csv"), "--delta", "0.05", "--out", str(out)])
    assert rc == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split()[0] for ln in lines[1:]] == ["Box", "Zono", "SymBox", "SymZono"]
    assert set(json.loads(out.read_text())) == {"Box", "Zono", "SymBox", "SymZono"}


def test_maxdelta(args, capsys):
    assert run(["maxdelta", *args, "--deltas", "0.5,1.0,100"]) == 0
    assert "1.0" in capsys.readouterr().out
    assert run(["maxdelta", *args, "--deltas", "100"]) == 1
    assert run(["maxdelta", *args, "--deltas", "a,b"]) == 2


def test_hints_command(args, tmp_path):
    out = tmp_path / "h.json"
    assert run(["hints", *args, "--delta", "1.0", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["neurons"]


def test_help_exit0(capsys):
    assert run(["--help"]) == 0
