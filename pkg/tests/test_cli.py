import csv
import io
import json
import math

import pytest

from szego_frames.cli import run


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def const1(tmp_path):
    return write(tmp_path / "const1.json", {"coeffs": [[1, 0]]})


def test_grid_stdout(capsys):
    assert run(["grid", "--rings", "2", "--out", "-"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "k,j,re,im,weight"
    rows = list(csv.reader(out[1:]))
    assert len(rows) == 3
    assert [float(r[2]) for r in rows] == [0, 0.5, -0.5]


def test_grid_file_has_manifest(tmp_path):
    out = tmp_path / "nodes.csv"
    assert run(["grid", "--rings", "10", "--out", str(out)]) == 0
    assert len(read_csv(out)) == 55
    man = json.loads((tmp_path / "nodes.csv.manifest.json").read_text())
    assert man["command"] == "grid" and man["parameters"] == {"rings": 10}
    assert {"seed", "tool_version", "timestamp"} <= set(man)


def test_verify_lemma3(tmp_path):
    out = tmp_path / "l3.csv"
    assert run(["verify", "lemma3", "--degree", "7", "--rings", "8", "--trials", "10",
                "--seed", "1", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 10
    assert all(abs(float(r["margin"])) <= 1e-10 for r in rows)


@pytest.mark.parametrize("check,extra", [("lemma4", []), ("eq5", [])])
def test_verify_other_checks(tmp_path, check, extra):
    out = tmp_path / f"{check}.csv"
    assert run(["verify", check, "--degree", "12", "--rings", "64", "--trials", "15",
                "--seed", "3", "--out", str(out)] + extra) == 0
    rows = read_csv(out)
    assert len(rows) == (30 if check == "eq5" else 15)
    assert list(rows[0]) == ["trial", "k", "r", "value", "bound", "margin"]


def test_verify_precondition_is_usage_error(capsys):
    assert run(["verify", "lemma3", "--degree", "8", "--rings", "8"]) == 2
    assert "--rings" in capsys.readouterr().err
    assert run(["verify", "eq5", "--degree", "8", "--rings", "4"]) == 2


def test_frame_bounds(tmp_path):
    out = tmp_path / "fb.csv"
    assert run(["frame-bounds", "--rings", "128", "--trials", "20", "--degree", "8",
                "--seed", "5", "--out", str(out)]) == 0
    ratios = [float(r["ratio"]) for r in read_csv(out)]
    assert len(ratios) == 20
    assert min(ratios) >= (1 - 1 / 128) ** 8 - 1e-9 and max(ratios) <= 1.5208869


def test_ds_divergence_closed_form(tmp_path, const1):
    out = tmp_path / "sums.csv"
    assert run(["ds-divergence", "--rings", "10", "--function", const1, "--out", str(out)]) == 0
    rows = read_csv(out)
    h10 = math.fsum(1 / k for k in range(1, 11))
    assert float(rows[-1]["partial_sum"]) == pytest.approx(20 - h10, abs=1e-12)
    assert float(rows[-1]["partial_sum"]) == pytest.approx(17.071, abs=5e-4)


def test_function_from_stdin(monkeypatch, capsys):
    monkeypatch.setattr("sys.stdin", io.StringIO('{"coeffs": [[1, 0]]}'))
    assert run(["ds-divergence", "--rings", "3", "--function", "-"]) == 0
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.startswith("3,")


def test_decompose_and_reconstruct(tmp_path):
    f = write(tmp_path / "f.json", {"coeffs": [[0.3, 0.1], [1, 0], [0, -0.5]]})
    dec = tmp_path / "d.json"
    assert run(["decompose", "--function", f, "--rings", "16", "--truncation", "48",
                "--tol", "1e-3", "--mu-stages", "8", "--out", str(dec)]) == 0
    d = json.loads(dec.read_text())
    assert d["residual_rel"] <= 1e-3
    assert len(d["prefix_residuals"]) == 16 and d["x"]["K"] == 16
    assert {"mixed_norm", "iterations", "manifest"} <= set(d)
    fhat = tmp_path / "fhat.json"
    assert run(["reconstruct", "--decomp", str(dec), "--out", str(fhat)]) == 0
    coeffs = json.loads(fhat.read_text())["coeffs"]
    assert len(coeffs) == 49
    assert coeffs[1][0] == pytest.approx(1, abs=1e-9)
    assert coeffs[2][1] == pytest.approx(-0.5, abs=1e-9)


def test_decompose_unmet_tolerance_exits_1(tmp_path, capsys):
    f = write(tmp_path / "f.json", {"coeffs": [[0.3, 0.1], [1, 0], [0, -0.5]]})
    code = run(["decompose", "--function", f, "--rings", "8", "--truncation", "16",
                "--tol", "1e-300", "--max-iter", "20", "--out", str(tmp_path / "d.json")])
    assert code == 1
    assert "VIOLATION" in capsys.readouterr().err


def test_report(tmp_path):
    l3 = tmp_path / "l3.csv"
    run(["verify", "lemma3", "--degree", "3", "--rings", "6", "--trials", "4", "--out", str(l3)])
    fb = tmp_path / "fb.csv"
    run(["frame-bounds", "--rings", "32", "--trials", "5", "--degree", "3", "--out", str(fb)])
    summary = tmp_path / "s.json"
    assert run(["report", "--inputs", str(l3), str(fb), "--out", str(summary)]) == 0
    s = json.loads(summary.read_text())
    assert s["violations"] == 0
    assert s["files"][0]["rows"] == 12 and "A_emp" in s["files"][1]


def test_report_flags_violations(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("trial,k,r,value,bound,margin\n0,3,0.5,2,1,-1\n")
    assert run(["report", "--inputs", str(bad), "--out", str(tmp_path / "s.json")]) == 1


def test_usage_errors(tmp_path, capsys):
    assert run(["nope"]) == 2
    assert run(["grid", "--rings", "3", "--bogus"]) == 2
    assert run(["grid", "--rings", "0"]) == 2
    missing = str(tmp_path / "missing.json")
    assert run(["ds-divergence", "--rings", "3", "--function", missing]) == 2
    assert missing in capsys.readouterr().err
    garbage = tmp_path / "g.json"
    garbage.write_text("{not json")
    assert run(["decompose", "--function", str(garbage), "--rings", "3"]) == 2
    assert run(["reconstruct", "--decomp", missing]) == 2


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    outs = []
    for n in ("1", "4"):
        monkeypatch.setenv("SZEGO_FRAMES_THREADS", n)
        out = tmp_path / f"e{n}.csv"
        assert run(["verify", "eq5", "--degree", "10", "--rings", "200", "--trials", "25",
                    "--seed", "8", "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    monkeypatch.setenv("SZEGO_FRAMES_THREADS", "many")
    assert run(["verify", "eq5", "--degree", "1", "--rings", "4", "--trials", "2"]) == 2
