"""Operator CLI: subcommand wiring over the journal and pure input files."""

import json

import pytest

from toxmarket.cli import main

ASSET_CSV = (
    "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference\n"
    "IE-0001,Unfinished development,Cork,51.6809,-9.4532,45000000,LN-1\n"
    "IE-0002,Retail unit,Cork,51.6890,-9.4530,12000000,LN-2\n"
)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "service.json"
    path.write_text(
        json.dumps({"journal_path": str(tmp_path / "journal.jsonl")})
    )
    return str(path)


@pytest.fixture
def asset_file(tmp_path):
    path = tmp_path / "assets.csv"
    path.write_text(ASSET_CSV)
    return str(path)


def test_ingest_reports_counts(config_path, asset_file, capsys):
    assert main(["ingest", asset_file, "--config", config_path]) == 0
    out = capsys.readouterr().out
    assert "accepted 2 record(s), rejected 0" in out
    # journal-backed: a second run sees duplicates
    assert main(["ingest", asset_file, "--config", config_path]) == 1
    out = capsys.readouterr().out
    assert "rejected 2" in out
    assert "duplicate" in out


def test_ingest_rejected_lines_reported(config_path, tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text(
        "asset_id,title,county,latitude,longitude,book_value_cents,loan_reference\n"
        "A1,t,Cork,95.0,-9.0,100,ref\n"
    )
    assert main(["ingest", str(bad), "--config", config_path]) == 1
    assert "line 2" in capsys.readouterr().out


def test_propose_pairs_lists_close_assets(config_path, asset_file, capsys):
    main(["ingest", asset_file, "--config", config_path])
    capsys.readouterr()

    # open base markets directly through the journal-backed state
    from toxmarket.config import load_config
    from toxmarket.service import build_state

    state = build_state(load_config(config_path))
    for asset_id in ("IE-0001", "IE-0002"):
        state.submit(
            {
                "type": "market_created",
                "asset_id": asset_id,
                "threshold_cents": 25_000_000,
                "b": 100.0,
                "cutoff": 1e12,
                "now": 0.0,
            }
        )
    state.journal.close()

    assert main(["propose-pairs", "--radius-km", "5", "--max", "10", "--config", config_path]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "asset_a,asset_b,distance_km"
    assert out.splitlines()[1].startswith("IE-0001,IE-0002,")


def test_settle_prints_payouts(config_path, asset_file, capsys):
    main(["ingest", asset_file, "--config", config_path])
    from toxmarket.config import load_config
    from toxmarket.service import build_state

    state = build_state(load_config(config_path))
    state.submit(
        {
            "type": "market_created",
            "asset_id": "IE-0001",
            "threshold_cents": 25_000_000,
            "b": 100.0,
            "cutoff": 10.0,  # already past by wall-clock settle time
            "now": 0.0,
        }
    )
    state.submit(
        {
            "type": "account_opened",
            "account_id": "alice",
            "token": "tok",
            "issued_at": 0.0,
            "expires_at": 1e12,
        }
    )
    state.submit(
        {
            "type": "trade_executed",
            "account_id": "alice",
            "market_id": "m-000001",
            "outcome": "HIGHER",
            "spend_cents": 513,
            "now": 1.0,
        }
    )
    state.journal.close()
    capsys.readouterr()

    assert main(
        ["settle", "m-000001", "--announced-cents", "26000000", "--config", config_path]
    ) == 0
    out = capsys.readouterr().out
    assert "HIGHER wins" in out
    assert "alice: EUR 10.01" in out


def test_settle_unknown_market_errors(config_path, capsys):
    assert main(
        ["settle", "m-404", "--announced-cents", "100", "--config", config_path]
    ) == 1
    assert "error:" in capsys.readouterr().err


def test_corrupt_journal_refused_with_offset(config_path, tmp_path, capsys):
    journal = tmp_path / "journal.jsonl"
    journal.write_text("{broken\n")
    rc = main(["propose-pairs", "--radius-km", "1", "--max", "1", "--config", config_path])
    assert rc == 1
    err = capsys.readouterr().err
    assert "refusing to start" in err
    assert "offset 0" in err


def test_optimize_solves_instance_file(tmp_path, capsys):
    instance = tmp_path / "basket.txt"
    instance.write_text("3,1200\n0,1000,600\n1,1000,600\n2,200,600\n0,1,500\n")
    assert main(["optimize", str(instance)]) == 0
    out = capsys.readouterr().out
    assert "proof: OPTIMAL" in out
    assert "selected: 0 1" in out
    assert "objective: EUR 25.00" in out


def test_optimize_export_model(tmp_path, capsys):
    instance = tmp_path / "basket.txt"
    instance.write_text("2,200\n0,500,100\n1,300,100\n0,1,-50\n")
    assert main(["optimize", str(instance), "--export-model"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("maximize:")
    assert "budget:" in out


def test_optimize_zero_time_limit(tmp_path, capsys):
    instance = tmp_path / "basket.txt"
    instance.write_text("2,200\n0,500,100\n1,300,100\n")
    assert main(["optimize", str(instance), "--time-limit-ms", "0"]) == 0
    out = capsys.readouterr().out
    assert "proof: BOUND_GAP" in out
    assert "upper bound:" in out


def test_simulate_runs_and_exports(tmp_path, capsys):
    sim = tmp_path / "sim.json"
    sim.write_text(
        json.dumps(
            {
                "seed": 1,
                "true_price_cents": 25_000_000,
                "thresholds_cents": [20_000_000, 30_000_000],
                "rounds": 5,
                "n_noise": 3,
            }
        )
    )
    assert main(["simulate", "--config", str(sim), "--seed", "7"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "round,threshold_cents,p_higher"
    assert "# ledger credits=" in out


def test_simulate_shock_flags(tmp_path, capsys):
    sim = tmp_path / "sim.json"
    sim.write_text(
        json.dumps(
            {
                "seed": 1,
                "true_price_cents": 25_000_000,
                "thresholds_cents": [20_000_000, 30_000_000],
                "rounds": 10,
                "n_informed": 5,
                "signal_noise_sigma_cents": 1_000_000,
            }
        )
    )
    assert main(
        ["simulate", "--config", str(sim), "--shock-round", "5", "--new-price", "35000000"]
    ) == 0
    out = capsys.readouterr().out
    assert "# half_life_rounds=" in out

    assert main(["simulate", "--config", str(sim), "--shock-round", "5"]) == 2
    assert "--new-price" in capsys.readouterr().err


def test_simulate_unknown_keys_rejected(tmp_path, capsys):
    sim = tmp_path / "sim.json"
    sim.write_text(json.dumps({"seed": 1, "bogus": True}))
    assert main(["simulate", "--config", str(sim)]) == 2
    assert "unknown simulation config keys" in capsys.readouterr().err
