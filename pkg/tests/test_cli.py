import csv
import io
import json
import subprocess
import sys

import pytest

from izeta.cli import main
from izeta.graph import write_graph
from izeta.limits import limit_moment_closed

from conftest import random_tree


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    return code, json.loads(out), err


# --- usage errors ----------------------------------------------------------------

def test_missing_required_flag_exits_2():
    proc = subprocess.run([sys.executable, "-m", "izeta", "moments", "--rho", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "--n" in proc.stderr
    assert proc.stdout == ""


@pytest.mark.parametrize(
    "argv",
    [
        ["moments", "--n", "10", "--rho", "20"],
        ["moments", "--n", "10", "--rho", "2", "--replicas", "1"],
        ["moments", "--n", "10", "--rho", "2", "--k-max", "0"],
        ["moments", "--n", "10", "--rho", "2", "--method", "trace", "--k-max", "4"],
        ["esd", "--n", "10", "--rho", "2", "--bins", "0"],
        ["xi", "--n", "10", "--rho", "2", "--v", "1.0"],
        ["xi", "--n", "10", "--rho", "2", "--v", "0.2", "--nodes", "4"],
        ["zeta-verify", "--builtin", "k5"],
        ["zeta-verify", "--builtin", "k4", "--order", "3"],
        ["zeta-verify", "--builtin", "k4", "--u", "0.3"],
        ["zeta-verify", "--graph", "/nonexistent/graph.txt"],
        ["moments", "--n", "10", "--rho", "2", "--threads", "0"],
    ],
)
def test_invalid_config_exits_2_with_one_line(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == ""
    assert len(err.strip().splitlines()) == 1


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["zeta-verify"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        main(["zeta-verify", "--builtin", "c3", "--graph", "x.txt"])
    assert info.value.code == 2


# --- moments ------------------------------------------------------------------------

def test_moments_json_layout(capsys):
    code, doc, _ = run_json(capsys, "moments", "--n", 40, "--rho", 4, "--replicas", 5, "--k-max", 3)
    assert code == 0
    assert doc["schema"] == "izeta/1"
    assert doc["timing_ms"] is None
    cfg = doc["config"]
    assert cfg["n"] == 40 and cfg["rho"] == 4.0 and cfg["seed"] == 0 and cfg["k_max"] == 3
    assert cfg["command"] == "moments" and cfg["method"] == "eigen"
    table = doc["results"]["table"]
    assert [r["k"] for r in table] == [0, 1, 2, 3]
    assert table[0]["empirical_mean"] == 1.0
    assert table[3]["R1_formula"] == pytest.approx(7.0)
    assert table[3]["R1_oracle"] == pytest.approx(6.0)
    for r in table:
        assert r["gap"] == pytest.approx(r["empirical_mean"] - r["limit_moment"])
        assert r["rho_gap"] == pytest.approx(4 * r["gap"])


def test_moments_zero_v(capsys):
    code, doc, _ = run_json(capsys, "moments", "--n", 30, "--rho", 3, "--v", 0, "--replicas", 3)
    assert code == 0
    assert doc["results"]["values"] == [1, 0, 0, 0, 0, 0, 0]
    assert doc["results"]["stderr"] == [0] * 7


def test_moments_csv(capsys):
    code, out, _ = run(capsys, "moments", "--n", 30, "--rho", 3, "--replicas", 3,
                       "--k-max", 2, "--format", "csv", "--method", "trace")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 3
    assert out.count("empirical_mean") == 1


def test_moments_example_second_moment(capsys):
    code, doc, _ = run_json(capsys, "moments", "--n", 1000, "--rho", 20, "--v", 1,
                            "--replicas", 100, "--k-max", 6, "--seed", 7)
    assert code == 0
    res = doc["results"]
    target = limit_moment_closed(2, 1.0) + 1 / 20 * 1.0
    assert abs(res["values"][2] - target) <= 3 * res["stderr"][2] + 0.06


def test_timing_flag(capsys):
    _, doc, _ = run_json(capsys, "moments", "--n", 20, "--rho", 2, "--replicas", 2,
                         "--k-max", 1, "--timing")
    assert doc["timing_ms"] >= 0


# --- byte identity ---------------------------------------------------------------------

@pytest.mark.parametrize(
    "argv",
    [
        ["moments", "--n", 60, "--rho", 5, "--replicas", 6, "--seed", 11],
        ["esd", "--n", 60, "--rho", 5, "--replicas", 4, "--seed", 3, "--format", "csv"],
        ["xi", "--n", 60, "--rho", 9, "--replicas", 4, "--v", -0.3, 0.0, 0.4],
        ["zeta-verify", "--builtin", "petersen"],
    ],
)
def test_outputs_are_byte_identical(tmp_path, capsys, argv):
    path = tmp_path / "out"
    argv = [str(a) for a in argv] + ["--out", str(path)]
    blobs = []
    for threads in (1, 1, 3):
        assert main(argv + ["--threads", str(threads)]) == 0
        blobs.append(path.read_bytes())
    capsys.readouterr()
    assert blobs[0] == blobs[1]
    # the worker cap is part of the recorded config but must not move any result
    if b'"schema"' in blobs[0]:
        assert json.loads(blobs[0])["results"] == json.loads(blobs[2])["results"]
    else:
        assert blobs[0] == blobs[2]


# --- esd --------------------------------------------------------------------------------

def test_esd_report(capsys):
    code, doc, err = run_json(capsys, "esd", "--n", 300, "--rho", 30, "--replicas", 3, "--bins", 20)
    assert code == 0
    res = doc["results"]
    assert len(res["histogram"]) == 20
    assert res["eigenvalue_count"] == 900
    assert 0 < res["ks"] < 0.2
    assert err.startswith("ks=")
    hist = res["histogram"]
    width = hist[0]["bin_right"] - hist[0]["bin_left"]
    assert sum(r["limit_density"] for r in hist) * width == pytest.approx(1.0, abs=1e-12)
    assert sum(r["empirical_density"] for r in hist) * width == pytest.approx(
        1 - res["mass_outside_bins"], abs=1e-12)


def test_esd_zero_v_point_mass(capsys):
    code, doc, _ = run_json(capsys, "esd", "--n", 50, "--rho", 5, "--v", 0, "--replicas", 2)
    assert code == 0
    assert doc["results"]["ks"] == 0.0


def test_esd_csv_columns(capsys):
    code, out, _ = run(capsys, "esd", "--n", 50, "--rho", 5, "--replicas", 2, "--format", "csv",
                       "--bins", 7)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "bin_left,bin_right,empirical_density,limit_density"
    assert len(lines) == 8


# --- zeta-verify ------------------------------------------------------------------------

@pytest.mark.parametrize("name, tol", [("c3", 1e-10), ("k4", 1e-9), ("c5", 1e-10),
                                       ("petersen", 1e-9), ("path2", 1e-10)])
def test_zeta_verify_builtins(capsys, name, tol):
    code, doc, err = run_json(capsys, "zeta-verify", "--builtin", name)
    assert code == 0
    res = doc["results"]
    assert res["passed"] and res["graph"] == name
    for c in res["checks"]:
        if c["residual"] is not None:
            assert c["residual"] <= tol, c
    assert "cycle_series" in err


def test_zeta_verify_c3_counts(capsys):
    _, doc, _ = run_json(capsys, "zeta-verify", "--builtin", "c3", "--order", 6)
    assert doc["results"]["walk_counts"] == [0, 0, 6, 0, 0, 6]
    assert doc["results"]["primitive_counts"] == [0, 0, 2, 0, 0, 0]


def test_zeta_verify_tree_file(tmp_path, capsys):
    path = tmp_path / "tree.txt"
    write_graph(random_tree(12, 4), path)
    code, doc, _ = run_json(capsys, "zeta-verify", "--graph", path)
    assert code == 0
    checks = {c["check"]: c for c in doc["results"]["checks"]}
    assert "skipped" in checks["bass_identity"]
    assert checks["forest_log_zeta_zero"]["passed"]
    assert checks["forest_log_zeta_zero"]["residual"] <= 1e-12
    assert set(doc["results"]["walk_counts"]) == {0}


def test_zeta_verify_malformed_file(tmp_path, capsys):
    path = tmp_path / "bad.txt"
    path.write_text("3 2\n0 1\n")
    code, _, err = run(capsys, "zeta-verify", "--graph", path)
    assert code == 2
    assert "bad.txt" in err


# --- xi -----------------------------------------------------------------------------------

def test_xi_rows(capsys):
    code, doc, _ = run_json(capsys, "xi", "--n", 200, "--rho", 20, "--replicas", 4,
                            "--v", -0.3, 0, 0.4)
    assert code == 0
    rows = doc["results"]["rows"]
    assert [r["v"] for r in rows] == [-0.3, 0.0, 0.4]
    zero = rows[1]
    assert zero["xi_limit"] == 0 and zero["xi_mean"] == 0 and zero["negative_count_total"] == 0
    assert abs(rows[0]["rh_gap"]) <= 1e-12
    assert rows[2]["negative_replica_fraction"] > 0


def test_failed_check_exits_1(capsys, monkeypatch):
    import izeta.cli

    # an impossible tolerance makes the identity checks fail
    monkeypatch.setattr(izeta.cli, "IDENTITY_TOL", -1.0)
    code, doc, err = run_json(capsys, "zeta-verify", "--builtin", "c3")
    assert code == 1
    assert doc["results"]["passed"] is False
    assert "FAIL" in err
