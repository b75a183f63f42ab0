import json

import pytest

from toraltrace import cli
from toraltrace.errors import QuadratureError

CIRCLE = {"type": "circle", "x0": [0.0, 0.0], "R": 0.2}
LINE = {"beta": 1, "kind": "line", "slope": [0.3, 0.1], "offset": [0.0, 0.0]}


@pytest.fixture
def circle_file(tmp_path):
    p = tmp_path / "circle.json"
    p.write_text(json.dumps(CIRCLE))
    return str(p)


def report(out, stem):
    with open(out / f"{stem}.json", encoding="utf-8") as fh:
        return json.load(fh)


def test_parse_range():
    assert cli.parse_range("7") == [7]
    assert cli.parse_range("1..4") == [1, 2, 3, 4]
    assert cli.parse_range("20..60:20") == [20, 40, 60]
    assert cli.parse_range("5,65,1105") == [5, 65, 1105]
    with pytest.raises(cli.UsageError):
        cli.parse_range("1..x")


def test_counts_check_jacobi(tmp_path):
    assert cli.run(["counts", "--dim", "2", "--max", "100000", "--check-jacobi", "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "counts")
    assert rep["passed"] and rep["result"]["jacobi_mismatches"] == []
    assert rep["version"] and rep["config"]["max"] == 100000


def test_sweep_writes_csv_and_echoes_measure(tmp_path, circle_file):
    assert cli.run(["sweep", "--dim", "2", "--n", "1..200", "--measure", circle_file, "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "sweep")
    assert rep["config"]["measure"] == circle_file
    assert json.loads(rep["result"]["measure"]["raw"]) == CIRCLE
    text = (tmp_path / "sweep.csv").read_bytes()
    assert b"\r" not in text
    header = text.decode().splitlines()[0].split(",")
    assert "lambda_max" in header


def test_csv_byte_identical_for_same_config(tmp_path, circle_file):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert cli.run(["bourgain", "--dim", "2", "--n", "1..300", "--seed", "3", "--samples", "200",
                        "--out", str(out)]) == 0
        assert cli.run(["sweep", "--dim", "2", "--n", "1..100", "--measure", circle_file, "--out", str(out)]) == 0
    for stem in ("bourgain", "sweep"):
        assert (a / f"{stem}.csv").read_bytes() == (b / f"{stem}.csv").read_bytes()


def test_csv_uses_17_significant_digits(tmp_path):
    assert cli.run(["cantor", "--alpha", "0.25", "--eps", "0.3", "--depth", "3", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "cantor.csv").read_text().splitlines()
    values = rows[1].split(",")
    rep = report(tmp_path, "cantor")
    assert float(values[1]) == rep["result"]["rows"][0]["seminorm"]


def test_cantor_pass(tmp_path):
    assert cli.run(["cantor", "--alpha", "0.25", "--eps", "0.3", "--depth", "10", "--out", str(tmp_path)]) == 0
    assert report(tmp_path, "cantor")["passed"]


def test_audit_failure_exits_1(tmp_path):
    # no shell keeps |u| >= 0.99 N on a ball of radius 1/lambda
    assert cli.run(["bourgain", "--dim", "2", "--n", "25", "--c0", "0.99", "--samples", "200",
                    "--out", str(tmp_path)]) == 1
    assert not report(tmp_path, "bourgain")["passed"]


@pytest.mark.parametrize("argv", [
    ["nosuch"],
    ["shell", "--dim", "2", "--n", "25", "--bogus"],
    ["shell", "--dim", "2"],
    ["shell", "--dim", "2", "--n", "1..x"],
    ["gram", "--dim", "2", "--n", "25", "--measure", "/nonexistent/m.json"],
    ["counts", "--dim", "3", "--max", "10", "--check-jacobi"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert cli.run(argv + ["--out", str(tmp_path)]) == 2


def test_non_convergence_exits_3(tmp_path, monkeypatch):
    def fail(*args, **kw):
        raise QuadratureError("no convergence", where=("amatrix", (1, 2, 3), 4))

    monkeypatch.setattr(cli.construct, "null_sweep", fail)
    patch = tmp_path / "line.json"
    patch.write_text(json.dumps(LINE))
    argv = ["nullspace", "--patch", str(patch), "--eps", "0.05", "--eta", "0.2", "--lam", "20", "--out", str(tmp_path)]
    assert cli.run(argv) == 3


def test_nullspace_then_vanish(tmp_path):
    patch = tmp_path / "line.json"
    patch.write_text(json.dumps(LINE))
    argv = ["nullspace", "--patch", str(patch), "--eps", "0.05", "--eta", "0.2", "--lam", "20,30",
            "--out", str(tmp_path)]
    assert cli.run(argv) == 0
    rep = report(tmp_path, "nullspace")
    assert all(r <= 1e-8 for r in (row["residual"] for row in _csv_rows(tmp_path / "nullspace.csv")))
    assert rep["result"]["eigenfunction"]
    meas = tmp_path / "patch_measure.json"
    meas.write_text(json.dumps({"type": "surface_patch", "patch": LINE, "eps": 0.05}))
    argv = ["vanish", "--measure", str(meas), "--coeffs", str(tmp_path / "nullspace.json"),
            "--max-ratio", "1e-2", "--out", str(tmp_path)]
    assert cli.run(argv) == 0
    assert report(tmp_path, "vanish")["result"]["ratio"] <= 1e-2


def _csv_rows(path):
    lines = path.read_text().splitlines()
    head = lines[0].split(",")
    out = []
    for line in lines[1:]:
        out.append({h: float(v) for h, v in zip(head, line.split(","))})
    return out


@pytest.mark.parametrize("argv", [
    ["shell", "--dim", "2", "--n", "1105"],
    ["clusters", "--dim", "2", "--n", "1105"],
    ["jarnik", "--max", "2000"],
    ["irregular", "--max", "10000", "--eps", "0.5"],
])
def test_commands_exit_0(tmp_path, argv):
    assert cli.run(argv + ["--out", str(tmp_path)]) == 0


def test_gram_blocks_probe(tmp_path, circle_file):
    for cmd in (["gram", "--dim", "2", "--n", "1105"], ["blocks", "--dim", "2", "--n", "1105"],
                ["measure-probe", "--max", "64"]):
        assert cli.run(cmd + ["--measure", circle_file, "--out", str(tmp_path)]) == 0
    rep = report(tmp_path, "gram")
    assert rep["result"]["certificate"]["residual_max"] <= 1e-8


def test_frostman_lebesgue(tmp_path):
    meas = tmp_path / "leb.json"
    meas.write_text(json.dumps({"type": "lebesgue", "d": 3}))
    assert cli.run(["frostman", "--dim", "3", "--n", "1..50", "--measure", str(meas), "--out", str(tmp_path)]) == 0
