import csv
import io
import json
import subprocess
import sys

import pytest

from avgdyn import cli
from avgdyn.graph import ClusteredGraph, load_graph, save_graph


def call(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def write_config(path, doc):
    path.write_text(json.dumps(doc))
    return str(path)


def read_csv(path):
    lines = path.read_bytes().decode().split("\r\n")
    assert lines[0].startswith("# config_sha256=")
    return list(csv.DictReader(io.StringIO("\r\n".join(lines[1:]))))


@pytest.fixture
def four_cycle_cfg(tmp_path):
    g = ClusteredGraph.from_edges([(0, 1, 1), (2, 3, 1), (0, 3, 1), (1, 2, 1)], 2)
    save_graph(g, tmp_path / "c4.txt")
    return write_config(tmp_path / "c4.json", {"graph": "c4.txt", "protocol": {"T_max": 10}})


def test_verify_four_cycle(tmp_path, capsys, four_cycle_cfg):
    code, out, err = call(["verify", "--config", four_cycle_cfg, "--out", str(tmp_path / "v")], capsys)
    assert code == cli.EXIT_CHECK
    rows = {r["check"]: r for r in read_csv(tmp_path / "v" / "verify.csv")}
    assert rows["chi_eigenvector"]["status"] == "pass"
    assert rows["spectral_gap"]["status"] == "fail"
    assert float(rows["spectral_gap"]["value"]) == pytest.approx(1.0)
    assert json.loads(err)["error"] == "check"


def test_verify_json_regular_sbm(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {
        "model": {"kind": "regular-sbm", "n": 200, "a": 20, "b": 4},
        "protocol": {"T_max": 30},
        "spectral": {"trials": 10_000},
    })
    code, out, err = call(["verify", "--config", cfg, "--out", str(tmp_path / "o"), "--format", "json"], capsys)
    doc = json.loads((tmp_path / "o" / "verify.json").read_text())
    status = {r["check"]: r["status"] for r in doc["checks"]}
    assert status["chi_eigenvector"] == "pass"
    assert status["spectral_gap"] == "pass"
    assert status["decomposition_bound"] == "pass"
    assert status["regsbm_lambda"] == "pass"
    assert doc["meta"]["seed"] == 0 and len(doc["meta"]["config_sha256"]) == 64
    assert code == (cli.EXIT_CHECK if "fail" in status.values() else cli.EXIT_OK)


def test_run_deterministic(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"model": {"kind": "regular-sbm", "n": 100, "a": 10, "b": 2},
                                             "protocol": {"T_max": 20}})
    for name in ("a", "b"):
        code, _, _ = call(["run", "--config", cfg, "--out", str(tmp_path / name)], capsys)
        assert code == 0
    for f in ("trajectory.csv", "report.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rep = json.loads((tmp_path / "a" / "report.json").read_text())
    assert rep["reconstruction"]["rounds"] == 20
    traj = read_csv(tmp_path / "a" / "trajectory.csv")
    assert len(traj) == 20 * 200 and {r["color"] for r in traj} <= {"B", "R"}


def test_run_csv_and_k3_signature(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {
        "model": {"kind": "k-regular-clustered", "n": 30, "a": 8, "b": 2, "k": 3},
        "protocol": {"T_max": 15, "ell": 4, "T": 8, "W": 4},
    })
    code, _, _ = call(["run", "--config", cfg, "--out", str(tmp_path / "o"), "--format", "csv"], capsys)
    assert code == 0
    row = read_csv(tmp_path / "o" / "report.csv")[0]
    assert "signature_groups" in row and int(row["rounds"]) == 15


def test_seed_flag_overrides_file(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"seed": 1, "model": {"n": 20, "a": 4, "b": 2}, "protocol": {"T_max": 3}})
    call(["run", "--config", cfg, "--seed", "2", "--out", str(tmp_path / "o")], capsys)
    assert json.loads((tmp_path / "o" / "report.json").read_text())["meta"]["seed"] == 2
    call(["run", "--config", cfg, "--out", str(tmp_path / "p")], capsys)
    assert json.loads((tmp_path / "p" / "report.json").read_text())["meta"]["seed"] == 1


def test_config_errors_list_every_field(tmp_path, capsys):
    cfg = write_config(tmp_path / "bad.json", {
        "seed": -3,
        "model": {"kind": "nope", "n": 0, "extra": 1},
        "protocol": {"W": 0},
        "sweep": {"a": []},
        "bogus": True,
    })
    code, _, err = call(["sweep", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == cli.EXIT_CONFIG
    doc = json.loads(err)
    fields = {v["field"] for v in doc["violations"]}
    assert {"seed", "model.kind", "model.n", "model.extra", "protocol.W", "sweep.a", "bogus"} <= fields


def test_invalid_json_and_missing_file(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    assert call(["run", "--config", str(p)], capsys)[0] == cli.EXIT_CONFIG
    assert call(["run", "--config", str(tmp_path / "missing.json")], capsys)[0] == cli.EXIT_CONFIG
    assert call(["run", "--seed", "abc", "--out", str(tmp_path)], capsys)[0] == cli.EXIT_CONFIG


def test_bad_graph_file(tmp_path, capsys):
    (tmp_path / "g.txt").write_text("4 2 2\n0 0 1 1\n0 1\n")
    cfg = write_config(tmp_path / "c.json", {"graph": "g.txt"})
    code, _, err = call(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == cli.EXIT_CONFIG
    assert json.loads(err)["lineno"] == 3
    cfg = write_config(tmp_path / "d.json", {"graph": "nothere.txt"})
    assert call(["run", "--config", cfg, "--out", str(tmp_path / "o")], capsys)[0] == cli.EXIT_CONFIG


def test_generate_round_trip(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"model": {"kind": "deterministic-circulant", "n": 8, "a": 3, "b": 1}})
    code, out, _ = call(["generate", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    text = (tmp_path / "o" / "graph.txt").read_text()
    assert text.startswith("# config_sha256=")
    g = load_graph(tmp_path / "o" / "graph.txt")
    assert g.num_nodes == 16 and set(g.degrees.tolist()) == {4}


def test_spectrum_outputs(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {"model": {"kind": "deterministic-circulant", "n": 20, "a": 7, "b": 1}})
    call(["spectrum", "--config", cfg, "--out", str(tmp_path / "j")], capsys)
    doc = json.loads((tmp_path / "j" / "spectrum.json").read_text())
    assert doc["spectrum"]["method"] == "dense"
    assert doc["spectrum"]["lambda2"] == pytest.approx(0.75)
    assert doc["alignment"]["size"] == 0
    call(["spectrum", "--config", cfg, "--out", str(tmp_path / "c"), "--format", "csv"], capsys)
    rows = read_csv(tmp_path / "c" / "spectrum.csv")
    assert len(rows) == 41 and rows[-1]["index"] == "min"


def test_spectrum_nonconvergence(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", {
        "model": {"kind": "regular-sbm", "n": 1002, "a": 6, "b": 2},
        "spectral": {"max_iter": 1, "tol": 1e-14},
    })
    code, _, err = call(["spectrum", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == cli.EXIT_NUMERIC
    assert json.loads(err)["error"] == "convergence"


@pytest.fixture
def sweep_cfg(tmp_path):
    return write_config(tmp_path / "s.json", {
        "model": {"kind": "regular-sbm", "n": 500, "a": 20, "b": 4},
        "protocol": {"T_max": 60},
        "sweep": {"a": [24, 16, 20], "b": [4], "seeds": list(range(20))},
    })


def test_sweep_cardinality_and_order(tmp_path, capsys, sweep_cfg, monkeypatch):
    monkeypatch.delenv("WORKERS", raising=False)
    code, _, _ = call(["sweep", "--config", sweep_cfg, "--out", str(tmp_path / "s1")], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "s1" / "sweep.csv")
    assert len(rows) == 60
    keys = [(float(r["a"]), int(r["seed"])) for r in rows]
    assert keys == sorted(keys)
    summary = read_csv(tmp_path / "s1" / "sweep_summary.csv")
    assert [float(r["a"]) for r in summary] == [16, 20, 24]
    assert all(int(r["num_runs"]) == 20 for r in summary)


def test_sweep_parallel_identical(tmp_path, capsys, sweep_cfg, monkeypatch):
    monkeypatch.setenv("WORKERS", "1")
    call(["sweep", "--config", sweep_cfg, "--out", str(tmp_path / "s1")], capsys)
    monkeypatch.setenv("WORKERS", "3")
    call(["sweep", "--config", sweep_cfg, "--out", str(tmp_path / "s3")], capsys)
    for f in ("sweep.csv", "sweep_summary.csv"):
        assert (tmp_path / "s1" / f).read_bytes() == (tmp_path / "s3" / f).read_bytes()


def test_sweep_row_reproduces_run(tmp_path, capsys):
    base = {"model": {"kind": "regular-sbm", "n": 50, "a": 6, "b": 2}, "protocol": {"T_max": 12}}
    cfg = write_config(tmp_path / "s.json", dict(base, sweep={"seeds": [5, 6]}))
    call(["sweep", "--config", cfg, "--out", str(tmp_path / "s"), "--format", "json"], capsys)
    rows = json.loads((tmp_path / "s" / "sweep.json").read_text())["rows"]
    cfg2 = write_config(tmp_path / "r.json", base)
    call(["run", "--config", cfg2, "--seed", "6", "--out", str(tmp_path / "r")], capsys)
    rep = json.loads((tmp_path / "r" / "report.json").read_text())["reconstruction"]
    assert rows[1]["seed"] == 6
    assert rows[1]["final_agreement"] == rep["final_agreement"]
    assert rows[1]["convergence_round"] == rep["convergence_round"]


def test_sweep_partial_failure(tmp_path, capsys):
    cfg = write_config(tmp_path / "s.json", {
        "model": {"kind": "regular-sbm", "n": 20, "a": 4, "b": 2},
        "protocol": {"T_max": 5},
        "sweep": {"n": [20, 21], "seeds": [0, 1]},
    })
    code, _, _ = call(["sweep", "--config", cfg, "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    rows = read_csv(tmp_path / "o" / "sweep.csv")
    status = {(r["n"], r["seed"]): r["status"] for r in rows}
    assert status == {("20", "0"): "ok", ("20", "1"): "ok", ("21", "0"): "error", ("21", "1"): "error"}
    assert "even n" in rows[-1]["error"]


def test_workers_env_validation(tmp_path, capsys, sweep_cfg, monkeypatch):
    monkeypatch.setenv("WORKERS", "zero")
    assert call(["sweep", "--config", sweep_cfg, "--out", str(tmp_path / "o")], capsys)[0] == cli.EXIT_CONFIG
    assert cli.workers_from_env({"WORKERS": "4"}) == 4
    assert cli.workers_from_env({}) == 1


def test_generate_rejects_format(tmp_path, capsys):
    code, _, err = call(["generate", "--format", "csv", "--out", str(tmp_path)], capsys)
    assert code == cli.EXIT_CONFIG


def test_digest_ignores_output_dir():
    cfg_a, _ = cli.merge_config({}, {"output.dir": "a"})
    cfg_b, _ = cli.merge_config({}, {"output.dir": "b"})
    assert cli.config_digest(cfg_a) == cli.config_digest(cfg_b)
    cfg_c, _ = cli.merge_config({"seed": 9})
    assert cli.config_digest(cfg_c) != cli.config_digest(cfg_a)


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "avgdyn.cli", "generate", "--out", str(tmp_path), "--seed", "4"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "graph.txt").exists()
