from __future__ import annotations

import csv
import json

import pytest

from sinairg import cli


def run(tmp_path, *argv):
    return cli.main([*argv, "--out-dir", str(tmp_path)])


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_coarsen_is_byte_identical(tmp_path):
    for k in range(2):
        assert cli.main(["coarsen", "--replicas", "10", "--x-max", "100", "--seed", "7",
                         "--out-dir", str(tmp_path / f"r{k}")]) == 0
    for name in ("flips.csv", "survival.csv"):
        assert (tmp_path / "r0" / name).read_bytes() == (tmp_path / "r1" / name).read_bytes()
    assert list(rows(tmp_path / "r0" / "flips.csv")[0]) == ["replica", "flip_index", "level"]


def test_genfun_at_one_is_exact(tmp_path):
    assert run(tmp_path, "genfun", "--z", "1.0", "--x", "50", "--replicas", "100") == 0
    (r,) = rows(tmp_path / "genfun.csv")
    assert float(r["analytic"]) == 1.0 and float(r["estimate"]) == 1.0
    assert list(r) == ["x", "z", "n", "estimate", "stderr", "analytic"]


def test_genfun_from_coarsening(tmp_path):
    assert run(tmp_path, "genfun", "--source", "coarsen", "--window", "51", "--x", "10,20",
               "--z", "0,0.5", "--replicas", "200") == 0
    assert len(rows(tmp_path / "genfun.csv")) == 4


def test_renewal_survival_schema(tmp_path):
    assert run(tmp_path, "renewal", "--replicas", "50", "--x-max", "100", "--x-list", "10,100") == 0
    out = rows(tmp_path / "survival.csv")
    assert [float(r["x"]) for r in out] == [10.0, 100.0]
    assert list(out[0]) == ["x", "n", "p_hat", "stderr", "analytic"]


def test_gridslopes_schema(tmp_path):
    assert run(tmp_path, "gridslopes", "--replicas", "5", "--grid-step", "0.01", "--half-length", "40") == 0
    out = rows(tmp_path / "gridstats.csv")
    assert len(out) == 5
    assert list(out[0]) == ["path_id", "central_excess", "central_length", "direction", "rel_origin",
                            "neighbor_excess"]
    assert {r["direction"] for r in out} <= {"up", "down"}


def test_ldp_and_pdecheck_json(tmp_path):
    assert run(tmp_path, "ldp", "--replicas", "200000", "--t", "10", "--format", "json") == 0
    (rec,) = json.loads((tmp_path / "ldp.json").read_text())
    assert rec["threshold"] == 10 and rec["hits"] >= 20
    assert run(tmp_path, "pdecheck", "--format", "json") == 0
    recs = json.loads((tmp_path / "pdecheck.json").read_text())
    assert all(r["abs_residual"] < 1e-5 for r in recs)


def test_numbers_round_trip(tmp_path):
    run(tmp_path, "renewal", "--replicas", "20", "--x-max", "1000", "--seed", "3")
    for r in rows(tmp_path / "flips.csv"):
        v = float(r["level"])
        assert repr(v) == repr(float("%.17g" % v))


def test_config_file_and_override(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# settings\nreplicas = 7\nx_max = 30\nseed = 5\n")
    assert run(tmp_path, "renewal", "--config", str(cfg), "--replicas", "4") == 0
    flips = rows(tmp_path / "flips.csv")
    assert {int(r["replica"]) for r in flips} <= set(range(4))
    out = rows(tmp_path / "survival.csv")
    assert float(out[0]["x"]) == 30.0 and int(out[0]["n"]) == 4


@pytest.mark.parametrize("argv", [
    ["nosuch"],
    ["coarsen", "--window", "10"],
    ["coarsen", "--replicas", "0"],
    ["coarsen", "--x-max", "0.5"],
    ["coarsen", "--policy", "other"],
    ["renewal", "--x-list", "500", "--x-max", "100"],
    ["genfun", "--z", "2"],
    ["ldp", "--replicas", "100", "--t", "15"],
])
def test_usage_errors_exit_one(tmp_path, argv, capsys):
    assert run(tmp_path, *argv) == 1
    assert "sinairg:" in capsys.readouterr().err


def test_bad_config_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    assert run(tmp_path, "renewal", "--config", str(cfg)) == 1
