import csv
import json
import math
import subprocess
import sys

import pytest

from biext import chen
from biext.cli import EXIT_CHECK, EXIT_CONVERGENCE, EXIT_OK, EXIT_PARSE, RunConfig, main, run


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        f = tmp_path / name
        f.write_text(json.dumps(obj))
        return str(f)

    return {
        "sphere": write("sphere.json", {"kind": "sphere", "punctures": ["inf", [0, 0]]}),
        "sphere3": write("sphere3.json", {"kind": "sphere", "punctures": ["inf", 0, 1]}),
        "torus": write("torus.json", {"kind": "torus", "tau": [0, 1], "punctures": [0, 0.5]}),
        "torus1": write("torus1.json", {"kind": "torus", "tau": [0, 1], "punctures": [0]}),
        "phi": write("phi.json", {"e_dim": 1, "kappa_dim": 0, "rows": [[1.0]], "base_period": [0.0]}),
        "expr": write("expr.json", {"length2": [{"forms": ["dz", "dzbar"]}]}),
        "zeta": write("zeta.json", {"length1": [{"form": "zeta:1"}]}),
        "path": write("path.json", {"vertices": [[2, 0], [2, 1], [3, 0]]}),
        "series": write("series.json", {"fs": [[0, 1, 0, 0, 0], [1, 0, 0, 0, 0]],
                                        "hs": [[1, 0, 0, 0, 0], [0, 1, 0, 0, 0]]}),
        "bad": write("bad.json", {"kind": "cube"}),
        "dir": tmp_path,
    }


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_compute_period(files, capsys):
    code, out = _run(capsys, "compute-period", "--surface", files["sphere"], "--base", "1,0", "--point", "2,0")
    assert code == EXIT_OK
    data = json.loads(out.out)
    assert data["labels"] == ["e1"] and data["kappa"] == []
    assert abs(data["e"][0] + math.log(2) / (2 * math.pi)) < 1e-9


def test_compute_period_diagonal_is_zero(files, capsys):
    code, out = _run(capsys, "compute-period", "--surface", files["torus"], "--base", "0.25,0.3",
                     "--point", "0.25,0.3")
    data = json.loads(out.out)
    assert code == EXIT_OK and data["e"] == [0.0] and data["kappa"] == [0.0]


def test_negative_coordinates(files, capsys):
    code, out = _run(capsys, "compute-period", "--surface", files["sphere"], "--base", "-1,-0.5",
                     "--point", "-2,0", "--method", "closed_form")
    assert code == EXIT_OK
    assert json.loads(out.out)["method"] == "closed_form"


def test_scan_csv_circle(files, capsys):
    code, out = _run(capsys, "scan-zero-locus", "--surface", files["sphere"], "--base", "1,0",
                     "--grid", "128", "--region", "-2,2,-2,2", "--tol", "1e-3")
    assert code == EXIT_OK
    lines = out.out.splitlines()
    assert lines[-1].startswith("# verdict: nowhere dense;")
    rows = list(csv.DictReader(lines[:-1]))
    assert rows and list(rows[0]) == ["ix", "iy", "q_re", "q_im", "norm", "e1"]
    diag = math.hypot(4 / 128, 4 / 128)
    for r in rows:
        assert abs(abs(complex(float(r["q_re"]), float(r["q_im"]))) - 1) < diag
        assert float(r["norm"]) < 1e-3


def test_scan_json_and_figure(files, capsys):
    fig = files["dir"] / "scan.png"
    code, out = _run(capsys, "scan-zero-locus", "--surface", files["torus"], "--base", "0.25,0.3",
                     "--grid", "32", "--format", "json", "--tol", "1e-2", "--figure", str(fig))
    assert code == EXIT_OK
    data = json.loads(out.out)
    assert data["nowhere_dense"] and data["labels"] == ["e1", "kappa1"] and data["grid"] == 32
    assert fig.stat().st_size > 1000


def test_scan_is_byte_identical(files, capsys, monkeypatch):
    argv = ["scan-zero-locus", "--surface", files["torus"], "--base", "0.25,0.3", "--grid", "64", "--tol", "1e-2"]
    _, a = _run(capsys, *argv)
    _, b = _run(capsys, *argv)
    monkeypatch.setenv("BIEXT_THREADS", "4")
    _, c = _run(capsys, *argv)
    assert a.out == b.out == c.out


def test_splitting_locus_and_pushforward(files, capsys):
    code, out = _run(capsys, "splitting-locus", "--surface", files["sphere"], "--base", "1,0",
                     "--phi", files["phi"], "--grid", "64")
    assert code == EXIT_OK
    assert out.out.splitlines()[-1].startswith("# verdict: nowhere dense")
    code, out = _run(capsys, "pushforward", "--surface", files["sphere"], "--base", "1,0", "--point", "2,0",
                     "--phi", files["phi"])
    data = json.loads(out.out)
    assert code == EXIT_OK and data["rank"] == 1
    assert abs(data["period_float"][0] + math.log(2) / (2 * math.pi)) < 1e-9


def test_greens_table(files, capsys):
    fig = files["dir"] / "green.png"
    code, out = _run(capsys, "greens-table", "--surface", files["torus1"], "--grid", "8", "--figure", str(fig))
    assert code == EXIT_OK
    rows = list(csv.DictReader(out.out.splitlines()))
    assert len(rows) == 64 and list(rows[0]) == ["z_re", "z_im", "f"]
    assert fig.exists()
    code, out = _run(capsys, "greens-table", "--surface", files["torus1"], "--grid", "8", "--format", "json")
    assert json.loads(out.out)["log_coefficient"] < 0


def test_greens_table_needs_torus(files, capsys):
    code, out = _run(capsys, "greens-table", "--surface", files["sphere"])
    assert code == EXIT_PARSE and "torus" in out.err


def test_integrate(files, capsys):
    code, out = _run(capsys, "integrate", "--surface", files["sphere3"], "--expr", files["expr"],
                     "--path", files["path"])
    data = json.loads(out.out)
    assert code == EXIT_OK and not data["relatively_closed"]
    assert abs(complex(*data["value"]) - (0.5 + 1j)) < 1e-12


def test_integrate_nonconvergence(files, capsys, monkeypatch, tmp_path):
    near = tmp_path / "near.json"
    near.write_text(json.dumps({"vertices": [[-1, 1e-4], [1, 1e-4]]}))
    monkeypatch.setattr(chen, "MAX_DEPTH", 1)
    code, out = _run(capsys, "integrate", "--surface", files["sphere"], "--expr", files["zeta"],
                     "--path", str(near))
    assert code == EXIT_CONVERGENCE and "non-convergence" in out.err


def test_verify_shuffle_passes(capsys):
    code, out = _run(capsys, "verify", "--suite", "shuffle")
    assert code == EXIT_OK
    assert out.out.startswith("PASS shuffle") and out.out.endswith("1/1 checks passed\n")


def test_verify_failure_exit_code(capsys):
    code, out = _run(capsys, "verify", "--suite", "shuffle,chen", "--tol", "1e-300")
    assert code == EXIT_CHECK and "FAIL" in out.out


def test_series_dependence(files, capsys):
    code, out = _run(capsys, "series-dependence", "--series", files["series"])
    data = json.loads(out.out)
    assert code == EXIT_OK and data["identity_holds"]
    assert data["verdict"] == "dependent (truncated at order 4)"


def test_parse_errors(files, capsys):
    cases = [
        ["compute-period", "--surface", files["bad"], "--base", "1,0", "--point", "2,0"],
        ["compute-period", "--surface", files["sphere"], "--base", "1,0"],
        ["compute-period", "--surface", files["sphere"], "--base", "0,0", "--point", "2,0"],
        ["compute-period", "--surface", files["sphere"], "--base", "one", "--point", "2,0"],
        ["scan-zero-locus", "--surface", files["sphere"], "--base", "1,0", "--grid", "4"],
        ["scan-zero-locus", "--surface", files["sphere"], "--base", "1,0", "--tol", "-1"],
        ["scan-zero-locus", "--surface", files["sphere"], "--base", "1,0", "--region", "1,0,0,1"],
        ["pushforward", "--surface", files["torus"], "--base", "0.25,0.3", "--point", "0.7,0.6",
         "--phi", files["phi"]],
        ["verify", "--suite", "nonsense"],
        ["compute-period", "--surface", str(files["dir"] / "missing.json"), "--base", "1,0", "--point", "2,0"],
    ]
    for argv in cases:
        code, out = _run(capsys, *argv)
        assert code == EXIT_PARSE, argv
        assert out.err.startswith("biext: error:")


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_run_config_validation():
    assert run(RunConfig("verify", suite="shuffle", out=None)) == EXIT_OK
    assert run(RunConfig("frobnicate")) == EXIT_PARSE
    assert run(RunConfig("verify", format="xml")) == EXIT_PARSE


def test_out_file_and_console_script(files, tmp_path):
    out = tmp_path / "p.json"
    res = subprocess.run([sys.executable, "-m", "biext.cli", "compute-period", "--surface", files["sphere"],
                          "--base", "1,0", "--point", "2,0", "--out", str(out)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout == ""
    assert json.loads(out.read_text())["labels"] == ["e1"]
