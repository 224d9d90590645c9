import dataclasses
import json

import numpy as np
import pytest

from fedgate.cli import main
from fedgate.errors import ValidationError
from fedgate.fl import (
    DatasetPartition,
    FederationConfig,
    LossSpec,
    load_partitions,
    run_federation,
)
from fedgate.ledger import load_chain, verify_chain_file
from fedgate.scenario import DEFAULT_FEDERATION, ScenarioConfig, replay_ledger, run_demo
from fedgate.service import FaultEvent


def demo_config(tmp_path, name="demo", **overrides):
    return ScenarioConfig(out_dir=str(tmp_path / name), **overrides)


# ---------------------------------------------------------------- scenario


def test_default_scenario_happy_path(tmp_path):
    result = run_demo(demo_config(tmp_path))
    assert result.exit_code == 0
    assert [d["decision"] for d in result.decisions] == ["granted", "denied"]
    assert result.job_state == "completed"
    assert result.model_path.exists()
    ok, _ = verify_chain_file(result.chain_path)
    assert ok
    for artifact in ("events.jsonl", "identity.jsonl", "summary.json", "data/manifest.json"):
        assert (result.out_dir / artifact).exists()


def test_denial_lands_on_chain(tmp_path):
    result = run_demo(demo_config(tmp_path))
    denial = next(d for d in result.decisions if d["decision"] == "denied")
    blocks = load_chain(result.chain_path)
    tx_ids = [tx.tx_id for block in blocks for tx in block.transactions]
    assert denial["txId"] in tx_ids
    assert denial["missing"] == ["consortium_member"]


def test_no_qualified_users_exits_nonzero(tmp_path):
    result = run_demo(demo_config(tmp_path, users=1, qualified_users=0))
    assert result.exit_code == 1
    assert result.job_state is None
    assert [d["decision"] for d in result.decisions] == ["denied"]
    denial_txs = [
        tx
        for block in load_chain(result.chain_path)
        for tx in block.transactions
        if tx.kind == "access_denial"
    ]
    assert len(denial_txs) == 1


def test_same_seed_twice_is_byte_identical(tmp_path):
    first = run_demo(demo_config(tmp_path, "one", seed=11))
    second = run_demo(demo_config(tmp_path, "two", seed=11))
    assert first.model_path.read_bytes() == second.model_path.read_bytes()
    assert first.chain_path.read_bytes() == second.chain_path.read_bytes()
    assert first.events_path.read_bytes() == second.events_path.read_bytes()
    third = run_demo(demo_config(tmp_path, "three", seed=12))
    assert first.model_path.read_bytes() != third.model_path.read_bytes()


def test_event_log_replays_to_same_ledger(tmp_path):
    result = run_demo(demo_config(tmp_path))
    rebuilt = replay_ledger(result.events_path)
    assert rebuilt.write_chain(tmp_path / "rebuilt.jsonl").read_bytes() == (
        result.chain_path.read_bytes()
    )


def test_scheme_b_demo_reaches_same_decisions(tmp_path):
    a = run_demo(demo_config(tmp_path, "a", scheme="contract_lookup"))
    b = run_demo(demo_config(tmp_path, "b", scheme="user_lookup"))
    assert a.exit_code == b.exit_code == 0
    assert [d["decision"] for d in a.decisions] == [
        d["decision"] for d in b.decisions
    ]


def test_demo_with_client_fault_and_standby(tmp_path):
    config = demo_config(
        tmp_path,
        fault_schedule=(FaultEvent(3, "node-001"),),
        standby_clients=1,
    )
    result = run_demo(config)
    assert result.exit_code == 0
    model = json.loads(result.model_path.read_text())
    assert [a["kind"] for a in model["failover"]] == ["client-swap"]


def test_scenario_config_invariants():
    with pytest.raises(ValidationError):
        ScenarioConfig(owners=2)  # federation still expects 3 partitions
    with pytest.raises(ValidationError):
        ScenarioConfig(fault_schedule=(FaultEvent(9, "node-000"),))
    with pytest.raises(ValidationError):
        ScenarioConfig(fault_schedule=(FaultEvent(2, "node-999"),))
    with pytest.raises(ValidationError):
        ScenarioConfig(scheme="wishful_thinking")
    with pytest.raises(ValidationError):
        ScenarioConfig(qualified_users=5)


def test_scenario_config_dict_round_trip():
    config = ScenarioConfig(
        seed=42,
        scheme="user_lookup",
        fault_schedule=(FaultEvent(2, "server-0"),),
        standby_servers=1,
    )
    assert ScenarioConfig.from_dict(config.to_dict()) == config
    assert ScenarioConfig.from_dict({}) == ScenarioConfig()


# --------------------------------------------------------------------- cli


def test_cli_demo_and_verify_chain(tmp_path):
    out = tmp_path / "demo"
    assert main(["demo", "--out", str(out), "--seed", "5"]) == 0
    assert main(["verify-chain", str(out / "chain.jsonl")]) == 0


def test_cli_demo_same_seed_byte_identical_models(tmp_path):
    main(["demo", "--out", str(tmp_path / "r1"), "--seed", "5"])
    main(["demo", "--out", str(tmp_path / "r2"), "--seed", "5"])
    one = (tmp_path / "r1/artifacts/job-0001/model.json").read_bytes()
    two = (tmp_path / "r2/artifacts/job-0001/model.json").read_bytes()
    assert one == two


def test_cli_demo_config_file(tmp_path):
    config = ScenarioConfig(users=3, qualified_users=2, out_dir="ignored")
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(config.to_dict()))
    out = tmp_path / "demo"
    assert main(["demo", "--config", str(path), "--out", str(out)]) == 0
    summary = json.loads((out / "summary.json").read_text())
    assert len(summary["decisions"]) == 3
    assert main(["demo", "--config", str(tmp_path / "nope.json")]) == 2


def test_cli_verify_chain_detects_bit_flip(tmp_path):
    out = tmp_path / "demo"
    main(["demo", "--out", str(out), "--seed", "5"])
    chain_path = out / "chain.jsonl"
    raw = bytearray(chain_path.read_bytes())
    # flip one bit inside a payload hex digit, keeping the JSON parseable
    offset = raw.index(b'"payload"') + 20
    raw[offset] ^= 0x01
    tampered = tmp_path / "tampered.jsonl"
    tampered.write_bytes(bytes(raw))
    assert main(["verify-chain", str(tampered)]) == 1
    assert main(["verify-chain", str(tmp_path / "missing.jsonl")]) == 2


def test_cli_gen_data_single_client_and_determinism(tmp_path):
    out = tmp_path / "ds"
    assert (
        main(
            ["gen-data", "--out", str(out), "--clients", "1", "--samples", "6", "--seed", "3"]
        )
        == 0
    )
    csvs = sorted(p.name for p in out.glob("client_*.csv"))
    assert csvs == ["client_000.csv"]

    again = tmp_path / "ds2"
    main(["gen-data", "--out", str(again), "--clients", "1", "--samples", "6", "--seed", "3"])
    assert (out / "client_000.csv").read_bytes() == (again / "client_000.csv").read_bytes()

    assert main(["gen-data", "--out", str(tmp_path / "bad"), "--clients", "0"]) == 2


def test_gen_data_high_separability_is_centrally_learnable(tmp_path):
    out = tmp_path / "ds"
    main(
        [
            "gen-data",
            "--out",
            str(out),
            "--clients",
            "4",
            "--samples",
            "50",
            "--separability",
            "4.0",
            "--seed",
            "6",
        ]
    )
    parts = load_partitions(out)
    pooled = DatasetPartition(
        client_id="all",
        features=np.vstack([p.features for p in parts]),
        labels=np.concatenate([p.labels for p in parts]),
    )
    config = FederationConfig(
        total_rounds=1,
        total_clients=1,
        subset_size=1,
        local_epochs=300,
        learning_rate=1.0,
        loss=LossSpec(kind="logistic", feature_dim=2),
        rng_seed=0,
    )
    captured = []
    run_federation(config, [pooled], observer=captured.append)
    assert captured[-1].train_accuracy >= 0.99


def test_cli_plot_metrics_series_matches_csv(tmp_path):
    out = tmp_path / "demo"
    main(["demo", "--out", str(out), "--seed", "5"])
    csv_path = out / "artifacts/job-0001/metrics.csv"
    dat_path = tmp_path / "series.dat"
    assert main(["plot-metrics", str(csv_path), "--out", str(dat_path)]) == 0

    from fedgate.fl import read_metrics_csv

    rows = read_metrics_csv(csv_path)
    lines = dat_path.read_text().splitlines()
    assert lines[0].startswith("#")
    assert len(lines) == 1 + len(rows)
    for row, line in zip(rows, lines[1:]):
        index, loss, accuracy = line.split()
        assert int(index) == row.round_index
        assert float(loss) == row.global_loss  # exact pass-through
        assert float(accuracy) == row.train_accuracy


def test_cli_plot_metrics_rejects_empty_and_missing(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("round,global_loss,train_accuracy,selected_clients\n")
    assert main(["plot-metrics", str(empty)]) == 2
    assert main(["plot-metrics", str(tmp_path / "missing.csv")]) == 2
    malformed = tmp_path / "malformed.csv"
    malformed.write_text("wrong,header\n1,2\n")
    assert main(["plot-metrics", str(malformed)]) == 2


def test_cli_import_legacy(tmp_path):
    accounts = tmp_path / "accounts.csv"
    accounts.write_text("username,role\nada,analyst\ngrace,admin\n")
    out = tmp_path / "legacy"
    assert main(["import-legacy", str(accounts), "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert [r["status"] for r in report] == ["imported", "imported"]
    assert report[0]["did"] == "did:efed:legacy-ada"
    ok, _ = verify_chain_file(out / "chain.jsonl")
    assert ok

    malformed = tmp_path / "broken.csv"
    malformed.write_text("who,what\nada,analyst\n")
    assert main(["import-legacy", str(malformed), "--out", str(out)]) == 2
    assert main(["import-legacy", str(tmp_path / "ghost.csv")]) == 2


def test_default_federation_matches_scenario_owner_count():
    assert DEFAULT_FEDERATION.total_clients == ScenarioConfig().owners
