import csv
import io
import json
from fractions import Fraction
from importlib import resources

import jsonschema
import pytest

from hullwalk.cli import CSV_COLUMNS, EXACT, run

SCHEMA = json.loads(resources.files("hullwalk").joinpath("schemas/result.schema.json").read_text())


def invoke(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def record(capsys, *argv):
    code, out, err = invoke(capsys, *argv)
    assert code == 0, err
    rec = json.loads(out)
    jsonschema.validate(rec, SCHEMA)
    return rec


def test_exact_theorem1_rational(capsys):
    rec = record(capsys, "exact", "theorem1", "--n", "3", "--format", "json")
    assert Fraction(rec["rational"]) == Fraction(23, 24)
    assert rec["exact"] == pytest.approx(23 / 24)
    for key in ("command", "quantity", "params", "n", "d", "samples", "seed", "wall_time_ms", "library_version"):
        assert key in rec


def test_sweep_csv_shape(capsys):
    code, out, _ = invoke(capsys, "sweep", "theorem1", "--n", "10,100,1000", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3
    assert list(rows[0]) == CSV_COLUMNS["sweep"]
    assert {"n", "exact", "asymptotic", "ratio"} <= set(rows[0])


def test_compare_tetrahedron(capsys):
    rec = record(capsys, "compare", "faces", "--d", "3", "--n", "3", "--dist", "gaussian", "--samples", "1000")
    assert rec["exact"] == 4.0 and rec["mean"] == 4.0 and rec["stderr"] == 0.0


@pytest.mark.parametrize("argv", [
    ("exact", "expected-faces", "--n", "5", "--d", "3"),
    ("exact", "face-pinned", "--n", "5", "--indices", "0,2"),
    ("exact", "orthoscheme", "--n", "6", "--k", "2"),
    ("sweep", "expected-faces-at-origin", "--n", "10,100", "--d", "2"),
    ("simulate", "origin-avoidance", "--n", "6", "--samples", "500"),
    ("simulate", "faces", "--n", "5", "--dist", "uniform-cube", "--samples", "200"),
    ("compare", "temporal-census", "--n", "6", "--gaps", "2", "--samples", "300", "--dist", "uniform-sphere"),
    ("compare", "bridge-origin-avoidance", "--n", "6", "--samples", "300", "--bridge", "conditional-gaussian"),
    ("simulate", "opening-angle-deficit", "--n", "4", "--d", "3", "--samples", "50", "--directions", "100"),
    ("simulate", "vk-crofton", "--n", "5", "--d", "3", "--k", "1", "--samples", "100", "--frames", "2"),
    ("simulate", "faces", "--n", "6", "--dist", "exponential", "--rates", "1,2", "--samples", "100"),
    ("simulate", "origin-avoidance", "--n", "6", "--dist", "mixture", "--scales", "1,3", "--samples", "100"),
    ("spitzer", "--route", "both", "--samples", "500", "--n-terms", "50"),
    ("spitzer", "--route", "angular", "--d", "2", "--directions", "4", "--samples", "300", "--n-terms", "20"),
    ("orthoscheme", "--n", "6", "--k", "2"),
    ("lemma-check", "--lemma", "2", "--d", "3", "--n", "5", "--trials", "5"),
])
def test_every_command_validates_against_schema(capsys, argv):
    record(capsys, *argv)


def test_csv_is_byte_identical(capsys, tmp_path):
    argv = ["compare", "origin-avoidance", "--n", "8", "--samples", "2000", "--seed", "3", "--format", "csv"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(argv + ["--output", str(a)]) == 0
    assert run(argv + ["--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    text = a.read_text()
    assert "wall_time_ms" not in text
    row = next(csv.DictReader(io.StringIO(text)))
    assert len(row["mean"].replace("-", "").replace(".", "").rstrip("0")) <= 18


def test_config_precedence(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nsamples = 700\nseed = 5\n")
    rec = record(capsys, "simulate", "origin-avoidance", "--n", "5", "--config", str(cfg))
    assert rec["samples"] == 700 and rec["seed"] == 5
    rec = record(capsys, "simulate", "origin-avoidance", "--n", "5", "--config", str(cfg), "--seed", "9")
    assert rec["samples"] == 700 and rec["seed"] == 9
    rec = record(capsys, "simulate", "origin-avoidance", "--n", "5")
    assert rec["samples"] == 10_000 and rec["seed"] == 0


def test_config_unknown_key(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    code, _, err = invoke(capsys, "simulate", "origin-avoidance", "--n", "5", "--config", str(cfg))
    assert code == 2 and "colour" in err


def test_unknown_quantity_lists_known_ids(capsys):
    code, _, err = invoke(capsys, "exact", "nonsense", "--n", "3")
    assert code == 2
    for name in ("theorem1", "bridge", "wendel"):
        assert name in err
    assert set(EXACT) >= {"theorem1", "bridge"}
    code, _, err = invoke(capsys, "simulate", "nonsense", "--n", "3")
    assert code == 2 and "origin-avoidance" in err


@pytest.mark.parametrize("argv", [
    ("simulate", "faces", "--n", "3", "--samples", "0"),
    ("exact", "theorem1"),
    ("compare", "origin-avoidance", "--n", "5", "--d", "4", "--samples", "10"),
    ("compare", "volume", "--n", "5", "--dist", "uniform-cube", "--samples", "10"),
    ("simulate", "faces", "--n", "5", "--dist", "nope"),
])
def test_validation_errors_exit_2(capsys, argv):
    assert invoke(capsys, *argv)[0] == 2


def test_degenerate_geometry_exit_3(capsys):
    # a tolerance larger than the points' spread flags every hull as degenerate
    code, _, err = invoke(capsys, "simulate", "faces", "--n", "3", "--samples", "1", "--tol", "10")
    assert code == 3 and "degenerate" in err
