import json
import os
import subprocess
import sys

import pytest

from sbmcycles import __version__
from sbmcycles.io import dumps, format_keyvalue, parse_keyvalue, read_comments, read_edgelist, read_labels


def run(*args, cwd=None, env_extra=None):
    env = dict(os.environ)
    env.pop("SBMCYCLES_SEED", None)
    env.update(env_extra or {})
    return subprocess.run([sys.executable, "-m", "sbmcycles", *map(str, args)], capture_output=True,
                          text=True, cwd=cwd, env=env)


def records(stdout):
    return [json.loads(line) for line in stdout.splitlines() if line.startswith("{")]


# --- sample --------------------------------------------------------------------

def test_sample_writes_files(tmp_path):
    res = run("sample", "--n", 100, "--a", 10, "--b", 2, "--seed", 7, "--out", tmp_path / "g")
    assert res.returncode == 0, res.stderr
    edges, labels = tmp_path / "g.edges", tmp_path / "g.labels"
    assert edges.read_text().splitlines()[0] == "n=100"
    G = read_edgelist(edges)
    assert G.n == 100 and read_labels(labels).size == 100
    assert read_comments(edges)["seed"] == "7"
    assert read_comments(labels)["version"] == __version__
    cfg = records(res.stdout)[0]
    assert cfg["record"] == "config" and cfg["seed"] == 7 and cfg["version"] == __version__


def test_sample_is_reproducible(tmp_path):
    for name in ("x", "y"):
        assert run("sample", "--n", 100, "--a", 10, "--b", 2, "--seed", 7, "--out", tmp_path / name).returncode == 0
    for ext in ("edges", "labels"):
        assert (tmp_path / f"x.{ext}").read_bytes() == (tmp_path / f"y.{ext}").read_bytes()


def test_seed_env_override(tmp_path):
    res = run("sample", "--n", 30, "--p", 0.3, "--q", 0.1, "--out", tmp_path / "e",
              env_extra={"SBMCYCLES_SEED": "7"})
    assert records(res.stdout)[0]["seed"] == 7


@pytest.mark.parametrize("argv", [
    ["sample", "--n", 100, "--a", 10, "--p", 0.1, "--b", 2],
    ["sample", "--n", 100, "--a", 10],
    ["sample", "--n", 10, "--p", 1.5, "--q", 0.1],
    ["stat", "--n", 50, "--p-hat", 0.1, "--a", 3],
    ["stat", "--n", 50, "--p-hat", 0.1, "--plugin", "--p-av", 0.2],
    ["moment", "--n", 10, "--t", -1],
    ["bogus"],
])
def test_usage_errors_exit_1(argv, tmp_path):
    res = run(*argv, cwd=tmp_path)
    assert res.returncode == 1, (res.stdout, res.stderr)


# --- analysis commands ---------------------------------------------------------

def test_stat_on_graph_file(tmp_path):
    run("sample", "--n", 25, "--p", 0.5, "--q", 0.2, "--seed", 1, "--out", tmp_path / "g")
    res = run("stat", "--graph", tmp_path / "g.edges", "--k", "3,4", "--p-av", 0.35)
    brute = run("stat", "--graph", tmp_path / "g.edges", "--k", "3,4", "--p-av", 0.35, "--method", "bruteforce")
    assert res.returncode == 0 and brute.returncode == 0
    fast_vals = [r["value"] for r in records(res.stdout) if r["record"] == "result"]
    brute_vals = [r["value"] for r in records(brute.stdout) if r["record"] == "result"]
    assert fast_vals == pytest.approx(brute_vals, rel=1e-9)
    assert records(res.stdout)[0]["seed"] == 1


def test_detect_estimate_recon(tmp_path):
    base = ["--n", 400, "--a", 30, "--b", 5, "--seed", 3]
    det = records(run("detect", *base).stdout)
    assert det[-1]["decision"] == "sbm_like"
    assert {"seed", "n", "a", "b", "k", "stat", "decision"} <= det[-1].keys()
    est = records(run("estimate", *base).stdout)[-1]
    assert est["a_hat"] + est["b_hat"] == pytest.approx(2 * est["d_hat"])
    rec = records(run("recon", *base).stdout)[-1]
    assert rec["ov_abs"] > 0.5


def test_moment_rows():
    res = run("moment", "--n", "100,2000", "--t", 0.5)
    rows = [r for r in records(res.stdout) if r["record"] == "result"]
    assert [r["n"] for r in rows] == [100, 2000]
    assert rows[1]["exact"] == pytest.approx(1.03466, rel=0.02)


# --- experiments ---------------------------------------------------------------

def test_experiment_second_moment():
    res = run("experiment", "--preset", "second-moment", "--t", 0.5, "--n", 2000)
    assert res.returncode == 0, res.stderr
    rows = [r for r in records(res.stdout) if r["record"] == "trial"]
    assert len(rows) == 1 and rows[0]["exact"] == pytest.approx(1.03466, rel=0.02)
    cfg = records(res.stdout)[0]
    assert cfg["record"] == "config" and cfg["seed"] == 0 and cfg["version"] == __version__


def test_experiment_unknown_preset():
    res = run("experiment", "--preset", "nonsense")
    assert res.returncode == 1
    for name in ("clt-null", "clt-shift", "second-moment", "threshold-sweep", "estimator", "overlap"):
        assert name in res.stderr


def test_experiment_malformed_config(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("preset=clt-null\nthis line has no equals sign\n")
    assert run("experiment", "--config", cfg).returncode == 1
    cfg.write_text("preset=clt-null\ntrials=many\n")
    assert run("experiment", "--config", cfg).returncode == 1


def test_experiment_outputs_byte_identical(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(format_keyvalue({"preset": "clt-null", "n": 80, "p_hat": 0.2, "trials": 30, "seed": 11}))
    for out, workers in (("a", 1), ("b", 2)):
        res = run("experiment", "--config", cfg, "--out", tmp_path / out, "--workers", workers)
        assert res.returncode == 0, res.stderr
    for name in ("clt-null.jsonl", "clt-null.summary.json", "clt-null.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    first = json.loads((tmp_path / "a" / "clt-null.jsonl").read_text().splitlines()[0])
    assert first["seed"] == 11 and first["version"] == __version__
    assert "seed=11" in (tmp_path / "a" / "clt-null.csv").read_text().splitlines()[0]


# --- selftest ------------------------------------------------------------------

def test_selftest_passes():
    res = run("selftest")
    assert res.returncode == 0, res.stdout
    assert "selftest passed" in res.stdout


def test_selftest_detects_corruption():
    res = run("selftest", "--corrupt-fast-coefficients")
    assert res.returncode == 2
    assert "FAIL fast_equals_bruteforce" in res.stdout


# --- text formats --------------------------------------------------------------

def test_keyvalue_roundtrip():
    data = {"preset": "overlap", "n": 10, "a": 0.1, "cs": [0.5, 1.0]}
    assert parse_keyvalue(format_keyvalue(data)) == {"preset": "overlap", "n": "10", "a": "0.1", "cs": "0.5,1.0"}
    assert parse_keyvalue("# comment\n\n n = 3 # trailing\n") == {"n": "3"}
    with pytest.raises(ValueError):
        parse_keyvalue("=3\n")


def test_dumps_full_precision():
    x = 0.1 + 0.2
    assert json.loads(dumps({"x": x}))["x"] == x
    assert dumps({"b": 1, "a": 2}) == dumps({"a": 2, "b": 1})
