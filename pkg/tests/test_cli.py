"""CLI subcommands: run, report, calibrate, and failure exit codes."""

import json

import pytest

from voxmeet.harness.cli import main

SMALL_CONFIG = {
    "participants": 2,
    "duration_s": 2.0,
    "seed": 9,
    "scene": {"seed": 4, "target_points": 1000},
    "cam_width": 96,
    "cam_height": 96,
    "service": {"mode": "fixed", "encode_us": 5000, "decode_us": 3000},
    "link": {"base_delay_us": 2000, "jitter_us": 0, "bandwidth_bps": 200e6},
}


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SMALL_CONFIG))
    return path


def test_run_and_report(config_file, tmp_path, capsys):
    out = tmp_path / "results"
    assert main(["run", "--config", str(config_file), "--out", str(out)]) == 0
    assert (out / "summary.json").exists()
    run_output = capsys.readouterr().out
    assert "mean e2e delay" in run_output

    assert main(["report", "--in", str(out)]) == 0
    table = capsys.readouterr().out
    assert "1->2" in table and "overall:" in table


def test_run_seed_override(config_file, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    main(["run", "--config", str(config_file), "--out", str(out_a), "--seed", "42"])
    main(["run", "--config", str(config_file), "--out", str(out_b), "--seed", "42"])
    assert (out_a / "summary.json").read_bytes() == (out_b / "summary.json").read_bytes()
    seed = json.loads((out_a / "summary.json").read_text())["seed"]
    assert seed == 42


def test_missing_config_fails(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 1
    assert "voxmeet:" in capsys.readouterr().err


def test_bad_participants_fails(tmp_path, capsys):
    bad = dict(SMALL_CONFIG, participants=9)
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(bad))
    assert main(["run", "--config", str(path), "--out", str(tmp_path / "o")]) == 1
    assert "participants" in capsys.readouterr().err


def test_report_missing_dir_fails(tmp_path, capsys):
    assert main(["report", "--in", str(tmp_path / "missing")]) == 1
    capsys.readouterr()


def test_calibrate_prints_stage_times(capsys):
    code = main(["calibrate", "--target-points", "1500", "--repeats", "1"])
    assert code == 0
    out = capsys.readouterr().out
    assert "encode_us:" in out and "decode_us:" in out and "kernel backend:" in out
