import json
import subprocess
import sys
from fractions import Fraction

import pytest

from instances import EXAMPLE_15, WITNESS_2
from parabolic.cli import main
from parabolic.germ import HypothesisError
from parabolic.germ_io import ParseError, dump_report, format_germ, parse_germ, parse_poly, quantity
from parabolic.series import Mode, QQI


def test_parse_examples():
    f = parse_germ("f1 = z + 1/2 z w - (2 + i) w**2\nf2 = w + 3*z^2")
    assert f.f1.get(1, 1) == QQI(Fraction(1, 2))
    assert f.f1.get(0, 2) == QQI(-2, -1)
    assert f.f2.get(2, 0) == QQI(3)
    assert f.polynomial


def test_round_trip_exact_and_float():
    f = parse_germ(EXAMPLE_15)
    g = parse_germ(format_germ(f))
    assert g.f1 == f.f1 and g.f2 == f.f2
    ff = parse_germ("f1 = z + 0.25*z*w; f2 = w - 1.5*w^2", mode=Mode.FLOAT)
    gg = parse_germ(format_germ(ff), mode=Mode.FLOAT)
    assert gg.f1.agrees_with(ff.f1, tol=0) and gg.f2.agrees_with(ff.f2, tol=0)


def test_truncation_from_degree():
    f = parse_germ("f1 = z + z^11; f2 = w + w^2")
    assert f.trunc == 11
    assert parse_germ("f1 = z + z^2; f2 = w + w^2").trunc == 8
    assert not parse_germ("f1 = z + z^11; f2 = w + w^2", trunc=6).polynomial


@pytest.mark.parametrize("text,pos", [
    ("f1 = z + ; f2 = w", 9),
    ("f1 = z + q; f2 = w", 9),
    ("f1 = z $ w; f2 = w", 7),
    ("f2 = w; f1 = z", 0),
])
def test_parse_errors_carry_position(text, pos):
    with pytest.raises(ParseError) as err:
        parse_germ(text)
    assert err.value.pos == pos


def test_parse_limits():
    with pytest.raises(ParseError, match="degree overflow"):
        parse_poly("z^1001")
    with pytest.raises(ParseError, match="non-constant"):
        parse_poly("z / w")
    with pytest.raises(ParseError, match="division by zero"):
        parse_poly("z / 0")
    with pytest.raises(HypothesisError):
        parse_germ("f1 = 1 + z; f2 = w")


def test_quantity_tags():
    assert quantity(QQI(Fraction(3, 2)), "p") == {"value": "3/2", "accuracy": "exact", "producer": "p"}
    assert quantity(QQI(1, -2), "p")["value"] == ["1", "-2"]
    q = quantity(0.1 + 0.2j, "p", 1e-10)
    assert q["accuracy"] == 1e-10 and q["value"] == [0.1, 0.2]
    assert quantity(2.0, "p")["accuracy"] == "float64"


def test_report_is_deterministic():
    rep = {"b": quantity(QQI(1), "x"), "a": [1, 2]}
    assert dump_report(rep) == dump_report(json.loads(dump_report(rep)))
    assert dump_report(rep).index('"a"') < dump_report(rep).index('"b"')


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_cli_analyze(capsys):
    code, rep = _run(capsys, "analyze", EXAMPLE_15)
    assert code == 0
    dirs = {d["direction"] for d in rep["result"]["directions"]}
    assert dirs == {"[1:0]", "[0:1]"}


def test_cli_index_and_classify(capsys):
    code, rep = _run(capsys, "index", EXAMPLE_15, "--direction", "[1:0]")
    assert code == 0 and rep["result"]["ind"]["value"] == "1"
    code, rep = _run(capsys, "classify", EXAMPLE_15, "--direction", "[1:0]")
    assert code == 0
    assert rep["result"]["classification"]["case"] == "EasyB"
    assert rep["result"]["verdict"]["prior_theorems_inapplicable"]


def test_cli_chain_certificate(capsys):
    code, rep = _run(capsys, "chain", EXAMPLE_15, "--direction", "[1:0]")
    assert code == 0 and rep["result"]["nondegenerate"]


def test_cli_normalize(capsys):
    code, rep = _run(capsys, "normalize", WITNESS_2, "--adapted", "--root", "1")
    assert code == 0
    nf = rep["result"]["normal_form"]
    assert nf["alpha"]["value"] == "-2" and nf["J"]["value"] == "3/2"


def test_cli_exit_codes(capsys, tmp_path):
    assert main(["analyze", "f1 = z; f2 = w"]) == 2
    assert main(["analyze", "f1 = z + ; f2 = w"]) == 1
    assert main(["classify", EXAMPLE_15, "--direction", "[1:1]"]) == 2
    assert main(["normalize", EXAMPLE_15, "--direction", "[1:0]"]) == 2
    src = tmp_path / "germ.txt"
    src.write_text("f1 = z + z*w + O; f2 = w")
    assert main(["analyze", str(src)]) == 1
    with pytest.raises(SystemExit) as err:
        main(["analyze"])
    assert err.value.code == 1
    capsys.readouterr()


def test_cli_truncation_exhausted(capsys):
    # a degree-10 term cut off at 8 makes the input a jet too short for the ladder
    jet = WITNESS_2 + " + z^9*w"
    assert main(["normalize", jet, "--adapted", "--trunc", "8", "--root", "1"]) == 3
    capsys.readouterr()


def test_cli_curve_writes_files(tmp_path):
    out = tmp_path / "run"
    proc = subprocess.run([sys.executable, "-m", "parabolic.cli", "curve", WITNESS_2, "--adapted", "--grid", "16",
                           "--delta", "0.01", "--out", str(out)], capture_output=True, text=True, timeout=600)
    assert proc.returncode == 0, proc.stderr
    rep = json.loads((out / "report.json").read_text())
    assert rep["exit_code"] == 0
    assert len(rep["result"]["curves"]) == 2
    assert (out / "curve_0.csv").exists() and (out / "curve_1.csv").exists()
    assert "curve: exit 0" in proc.stdout
