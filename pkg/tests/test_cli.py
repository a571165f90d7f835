import json

import pytest

from trailsim import cli


def small_config_dict():
    return {
        "params": {"f": 1, "F": 1, "s": 4, "t": 4, "S": 5},
        "rounds": 40,
        "seed": 1,
        "replicates": 2,
        "wallets_per_shard": 4,
        "coins_per_wallet": 2,
    }


def test_run_with_config_writes_outputs(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_config_dict()))
    out = tmp_path / "out"
    rc = cli.main(["run", "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    assert (out / "metrics_rep0.csv").exists()
    assert (out / "metrics_mean.csv").exists()
    assert "seed 1" in capsys.readouterr().out


def test_run_rejects_unknown_config_keys(tmp_path, capsys):
    d = small_config_dict()
    d["bogus"] = 1
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(d))
    rc = cli.main(["run", "--config", str(cfg_path)])
    assert rc == 2
    assert "bogus" in capsys.readouterr().err


def test_run_requires_exactly_one_source(capsys):
    assert cli.main(["run"]) == 2
    assert cli.main(["run", "--config", "x", "--preset", "y"]) == 2


def test_presets_lists_known_names(capsys):
    rc = cli.main(["presets"])
    assert rc == 0
    out = capsys.readouterr().out
    for name in ("fig3_desk", "fig4_desk", "recovery_desk", "mttf_desk", "oracle_desk"):
        assert name in out


def test_run_preset_with_overrides(tmp_path, capsys):
    rc = cli.main(
        ["run", "--preset", "oracle_desk", "--replicates", "1", "--out", str(tmp_path)]
    )
    assert rc == 0
    assert (tmp_path / "oracle_compare.json").exists()


def test_audit_accepts_clean_dump_and_flags_violation(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(small_config_dict()))
    out = tmp_path / "out"
    assert cli.main(["run", "--config", str(cfg_path), "--out", str(out)]) == 0
    dump = out / "ledger_rep0.csv"
    assert cli.main(["audit", str(dump)]) == 0

    # corrupt the dump with a double spend
    lines = dump.read_text().splitlines()
    coin_row = lines[1].split(",")
    forged = coin_row[:]
    forged[0] = "39"
    forged[3] = "3:3"  # second spend from the same source wallet
    bad = tmp_path / "bad.csv"
    bad.write_text("\n".join(lines + [",".join(forged)]) + "\n")
    rc = cli.main(["audit", str(bad)])
    assert rc == 1
    assert "violation" in capsys.readouterr().out
