import json
from pathlib import Path

import pytest

from guardsim.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.fixture
def replevin_log(tmp_path):
    log = tmp_path / "replevin.jsonl"
    assert main(["run", str(SCENARIOS / "replevin.tps"), "--out", str(log)]) == 0
    return log


def test_run_writes_log_and_reports(tmp_path, capsys):
    log = tmp_path / "replevin.jsonl"
    assert main(["run", str(SCENARIOS / "replevin.tps"), "--out", str(log)]) == 0
    assert log.exists()
    out = capsys.readouterr().out
    assert "hacked=1" in out
    assert "FOR_REPORTER" in out


def test_run_missing_or_invalid_scenario_exit_2(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.tps")]) == 2
    bad = tmp_path / "bad.tps"
    bad.write_text("FROB x\n")
    assert main(["run", str(bad)]) == 2


def test_replay_pass_and_fail(replevin_log, capsys):
    assert main(["replay", str(replevin_log)]) == 0
    data = replevin_log.read_bytes().replace(b'"price":"10.000000000000000000"', b'"price":"11.000000000000000000"')
    mutated = replevin_log.with_name("mutated.jsonl")
    mutated.write_bytes(data)
    assert main(["replay", str(mutated)]) == 1
    out = capsys.readouterr().out
    assert "fail at seq" in out


def test_replay_corrupt_log_exit_2(tmp_path):
    broken = tmp_path / "broken.jsonl"
    broken.write_text("not json at all\n")
    assert main(["replay", str(broken)]) == 2


def test_report_command(replevin_log, capsys):
    assert main(["report", str(replevin_log)]) == 0
    out = capsys.readouterr().out
    assert "conservation: ok" in out


def test_report_on_tampered_log_exits_nonzero(replevin_log):
    data = replevin_log.read_bytes().replace(
        b'"amount":"0.010000000000000000"', b'"amount":"0.090000000000000000"', 1
    )
    assert data != replevin_log.read_bytes()
    tampered = replevin_log.with_name("tampered.jsonl")
    tampered.write_bytes(data)
    assert main(["report", str(tampered)]) == 1


def test_state_output_format(replevin_log, capsys):
    assert main(["state", str(replevin_log), "1"]) == 0
    line = capsys.readouterr().out.strip()
    assert line.startswith("token=1 owner=0x")
    assert "state=LOCKED" in line and line.endswith("frozen_until=-")
    assert main(["state", str(replevin_log), "99"]) == 2


def test_case_record_output(replevin_log, capsys):
    assert main(["case", str(replevin_log), "1"]) == 0
    out = capsys.readouterr().out
    assert "case=1 token=1 status=closed verdict=FOR_REPORTER auto" in out
    assert "deposit=0.000000000000000000" in out
    assert out.count("vote=FOR_REPORTER") == 3
    assert "evidence" in out
    assert main(["case", str(replevin_log), "9"]) == 2


def test_explain_recomputes_verdict(replevin_log, capsys):
    assert main(["explain", str(replevin_log), "1"]) == 0
    out = capsys.readouterr().out
    assert "status=hacked" in out
    assert "R4_FLAGGED_PARTY" in out
    assert "offline recompute: hacked (agrees)" in out
    assert main(["explain", str(replevin_log), "42"]) == 2


def test_fuzz_command(capsys):
    assert main(["fuzz", "--iters", "800", "--seed", "3"]) == 0
    assert "no invariant violations" in capsys.readouterr().out


def test_run_respects_config_file(tmp_path, capsys):
    conf = tmp_path / "sim.conf"
    conf.write_text("freeze_ticks = 9\n")
    log = tmp_path / "out.jsonl"
    assert main(["run", str(SCENARIOS / "clean_sale.tps"), "--out", str(log), "--config", str(conf)]) == 0
    genesis = json.loads(log.read_text().splitlines()[3])
    assert genesis["kind"] == "Genesis"
    assert genesis["payload"]["config"]["freeze_ticks"] == "9"
