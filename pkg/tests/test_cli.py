"""End-to-end command-line checks: exit codes, schemas, determinism."""

import json
import math
import shutil
import subprocess

import numpy as np
import pytest

from fockcalc import (
    Bergman,
    Dims,
    Extension,
    GeometryData,
    GeometrySample,
    KernelExpr,
    NormalDirection,
    Poly,
    Restriction,
    Symbol,
    unit_expr,
)
from fockcalc.cli import run

PI = math.pi


def write_json(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def kernel_file(tmp_path, name, expr):
    return write_json(tmp_path, name, {"schema": "kernel/1", **expr.to_json_dict()})


def symbol_file(tmp_path, name, sym):
    return write_json(tmp_path, name, {"schema": "symbol/1", **sym.to_json_dict()})


def geom_file(tmp_path, name, data):
    return write_json(tmp_path, name, data.to_json_dict())


@pytest.fixture
def geom_data():
    sample = GeometrySample(
        id="p0",
        scal_X=16.0 * PI,
        scal_Y=0.0,
        normal_dirs=(
            NormalDirection(id="d1", level="WY", d_scal_diff=8.0 * PI),
            NormalDirection(id="f1", level="XW", d_scal_diff=3.0),
        ),
    )
    return GeometryData(dims=(0, 1, 2), samples=(sample,))


# -- compose ---------------------------------------------------------------------


def test_compose_round_trip(tmp_path, capsys):
    dims = Dims.of(1)
    left = KernelExpr(Poly.monomial(dims, {"z1": 1, "zb'1": 1}), Bergman(1))
    lf = kernel_file(tmp_path, "left.json", left)
    rf = kernel_file(tmp_path, "right.json", unit_expr(Bergman(1)))
    assert run(["compose", "--left", lf, "--right", rf]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "compose/1"
    assert out["plan"]["result_kind"] == "Bergman(1)"
    assert out["result"]["schema"] == "kernel/1"
    # the emitted kernel is valid input: compose it again
    back = write_json(tmp_path, "back.json", out["result"])
    assert run(["compose", "--left", back, "--right", rf]) == 0


def test_compose_golden_value(tmp_path, capsys):
    dims = Dims.of(1)
    # the left kernel's primed variable and the right kernel's unprimed one
    # are the integrated middle pair
    lf = kernel_file(tmp_path, "l.json", KernelExpr(Poly.monomial(dims, {"zb'1": 1}), Bergman(1)))
    rf = kernel_file(tmp_path, "r.json", KernelExpr(Poly.monomial(dims, {"z1": 1}), Bergman(1)))
    assert run(["compose", "--left", lf, "--right", rf]) == 0
    out = json.loads(capsys.readouterr().out)
    got = KernelExpr.from_json_dict(
        {k: v for k, v in out["result"].items() if k != "schema"}
    )
    want = Poly.monomial(dims, {"z1": 1, "zb'1": 1}).add(
        Poly.constant(dims, 1.0 / PI)
    )
    assert got.numerator.max_coef_diff(want) < 1e-15


def test_compose_error_paths(tmp_path):
    ef = kernel_file(tmp_path, "e.json", unit_expr(Extension(2, 1)))
    rf = kernel_file(tmp_path, "r.json", unit_expr(Restriction(2, 1)))
    assert run(["compose", "--left", ef, "--right", rf]) == 2  # unsupported pair
    assert run(["compose", "--left", str(tmp_path / "nope.json"), "--right", rf]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["compose", "--left", str(bad), "--right", rf]) == 2
    arr = write_json(tmp_path, "arr.json", [1, 2, 3])
    assert run(["compose", "--left", arr, "--right", rf]) == 2
    wrong = write_json(tmp_path, "wrong.json", {"schema": "kernel/9"})
    assert run(["compose", "--left", wrong, "--right", rf]) == 2
    body = json.loads((tmp_path / "e.json").read_text())
    extra = write_json(tmp_path, "extra.json", {**body, "colour": "green"})
    assert run(["compose", "--left", extra, "--right", rf]) == 2


def test_compose_output_deterministic(tmp_path):
    dims = Dims.of(2, m=1)
    left = KernelExpr(Poly.monomial(dims, {"z2": 2, "zb1": 1}), Bergman(2))
    lf = kernel_file(tmp_path, "left.json", left)
    rf = kernel_file(tmp_path, "right.json", unit_expr(Extension(2, 1)))
    out1, out2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    assert run(["compose", "--left", lf, "--right", rf, "--out", out1]) == 0
    assert run(["compose", "--left", lf, "--right", rf, "--out", out2]) == 0
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


# -- oracle-check -----------------------------------------------------------------


def test_oracle_check_pass_and_fail(tmp_path, capsys):
    dims = Dims.of(1)
    left = KernelExpr(Poly.monomial(dims, {"z1": 1, "zb'1": 1}), Bergman(1))
    lf = kernel_file(tmp_path, "l.json", left)
    rf = kernel_file(tmp_path, "r.json", left)
    assert run(["oracle-check", "--left", lf, "--right", rf]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "oracle/1" and out["report"]["pass"] is True
    # an absurd tolerance flips the exit code but is still a valid run
    assert run(["oracle-check", "--left", lf, "--right", rf, "--tol", "1e-18"]) == 1
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["pass"] is False


def test_oracle_check_custom_budget(tmp_path, capsys):
    lf = kernel_file(tmp_path, "l.json", unit_expr(Bergman(1)))
    assert run(["oracle-check", "--left", lf, "--right", lf, "--nodes", "16", "--points", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["grid"]["nodes_per_axis"] == 16


# -- spectrum ------------------------------------------------------------------------


def matrix_json(mat):
    return {
        "schema": "matrix/1",
        "matrix": [[[complex(v).real, complex(v).imag] for v in row] for row in np.atleast_2d(mat)],
    }


def test_spectrum(tmp_path, capsys):
    mf = write_json(tmp_path, "m.json", matrix_json(np.array([[0.0, -1.0j], [1.0j, 0.0]])))
    assert run(["spectrum", "--input", mf]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "spectrum/1"
    assert np.allclose(out["eigenvalues"], [-1.0, 1.0])


def test_spectrum_errors(tmp_path):
    assert run(["spectrum", "--input", write_json(tmp_path, "x.json", {"schema": "matrix/1"})]) == 2
    skew = write_json(tmp_path, "s.json", matrix_json(np.array([[0.0, 1.0], [0.0, 0.0]])))
    assert run(["spectrum", "--input", skew]) == 2


# -- toeplitz-leading ---------------------------------------------------------------


def test_toeplitz_leading_matrix_value(tmp_path, capsys):
    sf = symbol_file(tmp_path, "g.json", Symbol.monomial(1, 0, (1,), (1,)))
    assert run(["toeplitz-leading", "--kind", "YY", "--symbol", sf]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "toeplitz/1"
    assert (out["kind"], out["effective_kind"], out["order"]) == ("YY", "YY", 0)
    assert out["value_type"] == "matrix"
    assert abs(out["value"][0][0][0] - 1.0 / PI) < 1e-12


def test_toeplitz_leading_reroute(tmp_path, capsys):
    sf = symbol_file(tmp_path, "g.json", Symbol.monomial(1, 0, (2,), (1,)))  # odd symbol
    assert run(["toeplitz-leading", "--kind", "XY_even", "--symbol", sf]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["effective_kind"] == "XY_odd" and out["order"] == 1
    assert out["value_type"] == "symbol"
    val = Symbol.from_json_dict({k: v for k, v in out["value"].items() if k != "schema"})
    assert val.bidegrees() == [(1, 0)]


def test_toeplitz_leading_errors(tmp_path):
    mixed = Symbol.monomial(1, 0, (1,), (1,)).add(Symbol.monomial(1, 0, (1,), (0,)))
    sf = symbol_file(tmp_path, "mixed.json", mixed)
    assert run(["toeplitz-leading", "--kind", "XY_even", "--symbol", sf]) == 2
    ok = symbol_file(tmp_path, "ok.json", Symbol.monomial(1, 0, (1,), (1,)))
    assert run(["toeplitz-leading", "--kind", "XX", "--symbol", ok]) == 2  # argparse rejects


# -- constants -------------------------------------------------------------------------


def test_constants_c0_with_csv(tmp_path, capsys, geom_data):
    gf = geom_file(tmp_path, "geom.json", geom_data)
    csv_path = tmp_path / "c0.csv"
    assert run(["constants", "--geom", gf, "--which", "c0", "--csv", str(csv_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "constants/1" and out["which"] == "c0"
    assert abs(out["C0"] - 1.0 / math.sqrt(PI)) < 1e-12
    lines = csv_path.read_text().strip().splitlines()
    assert lines[0] == "constant,value,sample_id"
    assert lines[1].startswith("C0,") and lines[1].endswith(",p0")


def test_constants_c3c4(tmp_path, capsys, geom_data):
    gf = geom_file(tmp_path, "geom.json", geom_data)
    csv_path = tmp_path / "t.csv"
    assert run(["constants", "--geom", gf, "--which", "c3c4", "--csv", str(csv_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["C3"] + 1.0) < 1e-12 and abs(out["C4"] - 1.0) < 1e-12
    rows = csv_path.read_text().strip().splitlines()
    assert len(rows) == 3 and rows[1].startswith("C3,") and rows[2].startswith("C4,")


def test_constants_dp3_and_tower(tmp_path, capsys, geom_data):
    gf = geom_file(tmp_path, "geom.json", geom_data)
    assert run(["constants", "--geom", gf, "--which", "dp3", "--direction", '{"d1": 1.0}']) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["which"] == "dp3"
    assert abs(out["matrix"][0][0][0] - 1.0) < 1e-14
    cplx = '{"d1": [0.0, 2.0], "f1": 1.0}'
    assert run(["constants", "--geom", gf, "--which", "tower", "--direction", cplx]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["matrix"][0][0][1] - 2.0) < 1e-14  # imaginary part doubled


def test_constants_errors(tmp_path, geom_data):
    gf = geom_file(tmp_path, "geom.json", geom_data)
    assert run(["constants", "--geom", gf, "--which", "dp3"]) == 2  # missing --direction
    assert run(["constants", "--geom", gf, "--which", "dp3", "--direction", "{oops"]) == 2
    assert run(["constants", "--geom", gf, "--which", "dp3", "--direction", "[]"]) == 2
    assert (
        run(["constants", "--geom", gf, "--which", "dp3", "--direction", '{"d1": "x"}']) == 2
    )
    assert (
        run(
            [
                "constants",
                "--geom",
                gf,
                "--which",
                "dp3",
                "--direction",
                '{"d1": 1.0}',
                "--csv",
                str(tmp_path / "no.csv"),
            ]
        )
        == 2
    )
    bad = write_json(tmp_path, "bad.json", {"schema": "geom/1", "dims": [2], "samples": []})
    assert run(["constants", "--geom", bad, "--which", "c0"]) == 2


# -- defect-check ---------------------------------------------------------------------


def test_defect_check_default(tmp_path, capsys):
    assert run(["defect-check", "--max-n", "3"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["schema"] == "defect/1"
    assert out["pass"] is True and out["max_deviation"] == 0.0
    assert len(out["records"]) == 30


def test_defect_check_explicit_chain(capsys):
    assert run(["defect-check", "--n", "2", "--l", "1", "--m", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    names = sorted(rec["name"] for rec in out["records"])
    assert names == ["adjoint_extension", "transitivity"]
    trans = next(rec for rec in out["records"] if rec["name"] == "transitivity")
    assert (trans["n"], trans["l"], trans["m"]) == (2, 1, 0)


def test_defect_check_usage_errors():
    assert run(["defect-check", "--n", "2"]) == 2  # partial chain flags
    assert run(["defect-check", "--n", "1", "--l", "2", "--m", "0"]) == 2  # bad ordering


# -- selftest and shared flags -----------------------------------------------------------


def test_selftest(tmp_path):
    out_path = tmp_path / "selftest.txt"
    assert run(["selftest", "--out", str(out_path)]) == 0
    text = out_path.read_text()
    assert text.strip().endswith("selftest: 9/9 passed")
    assert text.count("PASS") == 9 and "FAIL" not in text


def test_shared_flag_validation(tmp_path):
    lf = kernel_file(tmp_path, "l.json", unit_expr(Bergman(1)))
    assert run(["compose", "--left", lf, "--right", lf, "--tol", "0"]) == 2
    assert run(["oracle-check", "--left", lf, "--right", lf, "--nodes", "0"]) == 2
    assert run(["compose", "--left", lf, "--right", lf, "--degree-cap", "-1"]) == 2


def test_help_exits_clean(capsys):
    assert run(["--help"]) == 0
    assert "compose" in capsys.readouterr().out
    assert run([]) == 2  # a subcommand is required


@pytest.mark.skipif(shutil.which("fockcalc") is None, reason="console script not installed")
def test_console_script_entry_point(tmp_path):
    mf = write_json(tmp_path, "m.json", matrix_json(np.diag([2.0, 1.0])))
    proc = subprocess.run(
        ["fockcalc", "spectrum", "--input", mf],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["eigenvalues"] == [1.0, 2.0]
