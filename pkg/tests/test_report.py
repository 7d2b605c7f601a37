"""Report files: roundtrip fidelity, idempotent writes, CSV shape."""

import json

import pytest

from voxmeet.capture import SceneConfig
from voxmeet.errors import IoError
from voxmeet.harness import (
    MetricsReport,
    ScenarioConfig,
    read_report,
    run_scenario,
    write_report,
)
from voxmeet.harness.service import ServiceTimes


@pytest.fixture(scope="module")
def report():
    cfg = ScenarioConfig(
        participants=2,
        duration_s=3.0,
        seed=5,
        scene=SceneConfig(seed=2, target_points=1_000),
        cam_width=96,
        cam_height=96,
        service_mode="fixed",
        service_fixed=ServiceTimes(0, 5_000, 3_000),
    )
    return run_scenario(cfg)


def test_summary_roundtrip(report, tmp_path):
    write_report(report, tmp_path)
    back = read_report(tmp_path)
    assert back.data == report.data


def test_rewrite_is_byte_identical(report, tmp_path):
    write_report(report, tmp_path)
    first = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    write_report(report, tmp_path)
    second = {p.name: p.read_bytes() for p in tmp_path.iterdir()}
    assert first == second


def test_expected_files(report, tmp_path):
    names = write_report(report, tmp_path)
    assert set(names) == {"summary.json", "throughput.csv", "delays.csv", "events.jsonl"}
    for name in names:
        assert (tmp_path / name).exists()


def test_delays_csv_row_count(report, tmp_path):
    write_report(report, tmp_path)
    lines = (tmp_path / "delays.csv").read_text().strip().splitlines()
    assert lines[0] == "sender,receiver,seq,delay_ms_raw,delay_ms_corrected"
    assert len(lines) - 1 == len(report["delay_rows"])


def test_throughput_csv_matches_windows(report, tmp_path):
    write_report(report, tmp_path)
    lines = (tmp_path / "throughput.csv").read_text().strip().splitlines()
    expected_rows = sum(len(t["windows_bits"]) for t in report["throughput"].values())
    assert len(lines) - 1 == expected_rows


def test_events_jsonl_parses(report, tmp_path):
    write_report(report, tmp_path)
    for line in (tmp_path / "events.jsonl").read_text().splitlines():
        assert isinstance(json.loads(line), dict)


def test_write_failure_raises_io_error(report, tmp_path):
    target = tmp_path / "blocked"
    target.write_text("a file, not a directory")
    with pytest.raises(IoError):
        write_report(report, target)


def test_read_missing_raises_io_error(tmp_path):
    with pytest.raises(IoError):
        read_report(tmp_path / "nowhere")


def test_from_json_identity(report):
    clone = MetricsReport.from_json(report.to_json())
    assert clone.data == report.data
