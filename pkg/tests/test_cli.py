import csv
import io
import json
import re

import pytest

from bdslab.config import settings
from bdslab.main import main

CASE1_ARGS = ["--alpha", "0.18", "--beta", "0.15", "--optimal-tau"]


def _csv_rows(text: str):
    lines = text.splitlines()
    assert lines[0].startswith("# schema: ")
    return list(csv.DictReader(io.StringIO("\n".join(lines[1:]))))


def _rers(text: str, column: str = "rer_analytic"):
    return {row["actor"]: float(row[column]) for row in _csv_rows(text)}


# ============================================================
# analytic
# ============================================================


def test_analytic_case1_csv(capsys):
    code = main(["analytic", *CASE1_ARGS, "--participation", "1.0", "--format", "csv"])
    out = capsys.readouterr().out
    assert code == 0
    assert out.startswith("# schema: analytic v1\n")
    rers = _rers(out)
    assert rers["bds_miner"] == pytest.approx(0.8411, abs=0.0015)
    assert rers["attacker_pool"] < 0.0


def test_analytic_without_infiltration(capsys):
    code = main(["analytic", "--alpha", "0.18", "--beta", "0.15", "--tau", "0", "--format", "csv"])
    assert code == 0
    rers = _rers(capsys.readouterr().out)
    assert "bds_miner" not in rers
    assert all(value == pytest.approx(0.0, abs=1e-12) for value in rers.values())


def test_analytic_human_output(capsys):
    assert main(["analytic", *CASE1_ARGS, "--participation", "0.2"]) == 0
    out = capsys.readouterr().out
    assert "Price bounds  C2 lower=" in out
    assert "bds_miner" in out


def test_analytic_json(capsys):
    assert main(["analytic", *CASE1_ARGS, "--participation", "0.2", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["price_bounds"]["feasible"] is True
    assert payload["revenue"]["price"] == pytest.approx(payload["price_bounds"]["upper"])


def test_invalid_alpha_exits_1(capsys):
    assert main(["analytic", "--alpha", "0.6", "--beta", "0.15", "--tau", "0.1"]) == 1
    assert "error:" in capsys.readouterr().err


def test_missing_tau_exits_1(capsys):
    assert main(["analytic", "--alpha", "0.18", "--beta", "0.15"]) == 1
    assert "--optimal-tau" in capsys.readouterr().err


def test_infeasible_scenario_exits_2(capsys):
    code = main([
        "analytic", "--alpha", "0.4", "--beta", "0.01", "--tau", "1", "--participation", "0.5",
    ])
    assert code == 2
    assert "tau*alpha < beta" in capsys.readouterr().err


def test_argument_errors_exit_1():
    with pytest.raises(SystemExit) as excinfo:
        main(["simulate", *CASE1_ARGS, "--rounds", "0"])
    assert excinfo.value.code == 1


# ============================================================
# simulate / curve / repro-table3 / sweep
# ============================================================


def test_simulate_is_reproducible(capsys):
    argv = [
        "simulate", *CASE1_ARGS, "--participation", "0.2",
        "--rounds", "5000", "--replicas", "4", "--seed", "3", "--format", "csv",
    ]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    assert capsys.readouterr().out == first
    rows = _csv_rows(first)
    assert {row["actor"] for row in rows} == {"others", "attacker_pool", "victim_pool", "bds_miner"}
    assert all(row["stderr"] for row in rows)


def test_simulate_share_level(capsys):
    argv = [
        "simulate", *CASE1_ARGS, "--participation", "1.0", "--share-level", "--difficulty", "5",
        "--rounds", "5000", "--replicas", "2",
    ]
    assert main(argv) == 0
    assert "mode=share" in capsys.readouterr().out


def test_curve_csv(capsys):
    argv = ["curve", "--alpha", "0.18", "--beta", "0.15", "--participations", "0.2,1.0", "--format", "csv"]
    assert main(argv) == 0
    rows = _csv_rows(capsys.readouterr().out)
    bds = [float(row["rer_analytic"]) for row in rows if row["actor"] == "bds_miner"]
    assert len(bds) == 2
    assert bds[0] > bds[1]


def test_repro_analytic_only(capsys):
    assert main(["repro-reference", "--analytic-only", "--format", "csv"]) == 0
    rows = _csv_rows(capsys.readouterr().out)
    assert len(rows) == 10
    assert all(row["pass"] == "pass" for row in rows)
    assert all(row["rer_sim"] == "" for row in rows)


def test_repro_human_summary(capsys):
    assert main(["repro-table3", "--analytic-only", "--case", "1"]) == 0
    out = capsys.readouterr().out
    assert "5/5 cells pass" in out
    assert "published simulation" not in out


def test_repro_with_simulation_shows_published_sim_check(capsys):
    argv = [
        "repro-table3", "--case", "1", "--rounds", "2000", "--replicas", "4", "--seed", "5",
    ]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "near pub." in out
    assert re.search(r"^[0-5]/5 simulated cells within 0\.30 pp of the published simulation$", out, re.M)


def test_sweep_victim_columns_match(capsys):
    argv = [
        "sweep", "--metric", "victim", "--alpha-step", "0.12", "--beta-step", "0.12",
        "--participations", "0.2,1.0", "--format", "csv",
    ]
    assert main(argv) == 0
    columns = {}
    for row in _csv_rows(capsys.readouterr().out):
        columns.setdefault(row["participation"], {})[(row["alpha"], row["beta"])] = float(row["value"])
    low, high = columns["0.2"], columns["1"]
    assert low.keys() == high.keys()
    for cell, value in low.items():
        assert high[cell] == pytest.approx(value, rel=1e-5)


# ============================================================
# game
# ============================================================


def test_game_solve_two_miners(capsys):
    assert main(["game", "solve", *CASE1_ARGS, "--powers", "0.007,0.007"]) == 0
    out = capsys.readouterr().out
    assert "Pure Nash equilibria: B,B" in out
    assert "Unique: yes" in out


def test_game_solve_csv_lists_every_profile(capsys):
    argv = ["game", "solve", *CASE1_ARGS, "--powers", "0.004,0.004,0.004", "--format", "csv"]
    assert main(argv) == 0
    rows = _csv_rows(capsys.readouterr().out)
    assert len(rows) == 8
    nash = [row["profile"] for row in rows if row["nash"] == "yes"]
    assert nash == ["B,B,B"]


def test_game_powers_above_infiltration_exit_1(capsys):
    # 0.008 + 0.008 exceeds tau*alpha ~ 0.0158 for the first case
    assert main(["game", "solve", *CASE1_ARGS, "--powers", "0.008,0.008"]) == 1
    assert "tau*alpha" in capsys.readouterr().err


def test_game_capacity_exits_3(capsys):
    powers = ",".join(["0.001"] * 13)
    assert main(["game", "solve", *CASE1_ARGS, "--powers", powers]) == 3
    assert "enumeration bound" in capsys.readouterr().err


def test_principal_agent(capsys):
    assert main(["game", "principal-agent", *CASE1_ARGS, "--powers", "0.007,0.007"]) == 0
    assert "Subgame perfect equilibrium: (H, B, B)" in capsys.readouterr().out


def test_ultimatum(capsys):
    assert main(["game", "ultimatum", *CASE1_ARGS, "--participation", "0.2", "--format", "json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["outcome"]["response"] == "Accept"


# ============================================================
# Config file and output
# ============================================================


def test_config_file_supplies_defaults(tmp_path, capsys):
    config = tmp_path / "case1.json"
    config.write_text(json.dumps({
        "alpha": 0.18, "beta": 0.15, "optimal-tau": True, "participation": 1.0, "format": "csv",
    }))
    assert main(["analytic", "--config", str(config)]) == 0
    full = _rers(capsys.readouterr().out)["bds_miner"]

    assert main(["analytic", "--config", str(config), "--participation", "0.2"]) == 0
    partial = _rers(capsys.readouterr().out)["bds_miner"]
    assert full == pytest.approx(0.8411, abs=0.0015)
    assert partial == pytest.approx(0.8636, abs=0.0015)


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    config = tmp_path / "bad.json"
    config.write_text(json.dumps({"alpah": 0.18}))
    assert main(["analytic", "--config", str(config)]) == 1
    assert "alpah" in capsys.readouterr().err


def test_missing_config_file(tmp_path, capsys):
    assert main(["analytic", "--config", str(tmp_path / "missing.json")]) == 1
    assert "not found" in capsys.readouterr().err


def test_output_lands_in_output_dir(tmp_path, monkeypatch, capsys):
    monkeypatch.setattr(settings, "output_dir", str(tmp_path))
    argv = ["analytic", *CASE1_ARGS, "--participation", "1.0", "--format", "csv", "--output", "case1.csv"]
    assert main(argv) == 0
    assert capsys.readouterr().out == ""
    written = (tmp_path / "case1.csv").read_text()
    assert written.startswith("# schema: analytic v1\n")
