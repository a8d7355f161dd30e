import csv
import io
import json
import subprocess
import sys

import pytest

from tdoa_bifurcation.cli import main


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"receivers": [["0", "0"], ["2", "0"], ["2", "2"]]}))
    return str(p)


@pytest.fixture
def collinear_path(tmp_path):
    p = tmp_path / "col.json"
    p.write_text(json.dumps({"receivers": [["0", "0"], ["1", "1"], ["2", "2"]]}))
    return str(p)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_classify_tau(capsys, cfg_path):
    code, out, _ = run(capsys, "classify-tau", "--receivers", cfg_path, "--tau", "0,0")
    assert code == 0
    assert json.loads(out)["region"] == "InteriorUnique"


def test_localize(capsys, cfg_path):
    code, out, _ = run(capsys, "localize", "--receivers", cfg_path, "--tau", "0,0")
    d = json.loads(out)
    assert code == 0 and d["sources"] == [[1.0, 1.0]] and d["degenerate"] is False


def test_bifurcation_poly(capsys, cfg_path):
    code, out, _ = run(capsys, "bifurcation-poly", "--receivers", cfg_path, "--normalized")
    recs = {(r["i"], r["j"]): r["c"] for r in json.loads(out)}
    assert recs[(4, 1)] == "-4/1" and recs[(0, 0)] == "1/1"
    code, out, _ = run(capsys, "bifurcation-poly", "--receivers", cfg_path, "--normalized", "--format", "text")
    assert out.startswith("-4*x^4*y")


def test_classify_point(capsys, cfg_path):
    code, out, _ = run(capsys, "classify-point", "--receivers", cfg_path, "--point", "2,0")
    d = json.loads(out)
    assert d["region"] == "AmbiguousRegion" and d["F_exact"] == "65536/1"


def test_asymptotes(capsys, cfg_path):
    code, out, _ = run(capsys, "asymptotes", "--receivers", cfg_path)
    d = json.loads(out)
    assert d["lines"][0] == ["8/1", "0/1", "-12/1"]
    assert len(d["ideal_points"]) == 3


def test_curve_sample_formats(capsys, cfg_path, tmp_path):
    code, out, _ = run(capsys, "curve-sample", "--receivers", cfg_path, "--n", "360")
    assert len(json.loads(out)["arcs"]) == 3
    code, out, _ = run(capsys, "curve-sample", "--receivers", cfg_path, "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert {r["arc_id"] for r in rows} == {"0", "1", "2"}
    svg = tmp_path / "c.svg"
    code, out, _ = run(capsys, "curve-sample", "--receivers", cfg_path, "--format", "svg", "--out", str(svg))
    assert out == "" and svg.read_text().startswith("<svg") and svg.read_text().count("<polyline") == 3


def test_tangency_and_vertices(capsys, cfg_path):
    _, out, _ = run(capsys, "tangency", "--receivers", cfg_path)
    assert json.loads(out)["points"][0] == [2.0, 2.0]
    _, out, _ = run(capsys, "vertices", "--receivers", cfg_path)
    assert len(json.loads(out)["vertices"]) == 6


def test_validate(capsys, cfg_path):
    code, out, _ = run(capsys, "validate", "--receivers", cfg_path, "--format", "json")
    d = json.loads(out)
    assert code == 0 and d["ok"] and len(d["checks"]) == 12


def test_collinear_exit_code(capsys, collinear_path):
    code, _, err = run(capsys, "vertices", "--receivers", collinear_path)
    assert code == 1 and err.startswith("CollinearReceivers")


@pytest.mark.parametrize(
    "argv",
    [
        ["localize", "--receivers", "/nonexistent.json", "--tau", "0,0"],
        ["localize", "--tau", "0,0"],
        ["classify-tau", "--receivers", "CFG", "--tau", "1"],
        ["classify-tau", "--receivers", "CFG", "--tau", "a,b"],
        ["curve-sample", "--receivers", "CFG", "--n", "2"],
        ["no-such-command"],
    ],
)
def test_input_errors_exit_1(capsys, cfg_path, argv):
    argv = [cfg_path if a == "CFG" else a for a in argv]
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_module_entry_point(cfg_path):
    out = subprocess.run(
        [sys.executable, "-m", "tdoa_bifurcation", "vertices", "--receivers", cfg_path],
        capture_output=True, text=True,
    )
    assert out.returncode == 0 and "vertices" in out.stdout
