"""Scenario runner, network emulation, metrics, and reporting."""

from voxmeet.harness.link import Link, LinkModel, link_transfer
from voxmeet.harness.metrics import (
    DelayStats,
    SkewStats,
    delay_stats,
    series_stats,
    skew_stats,
    throughput_series,
)
from voxmeet.harness.report import MetricsReport, read_report, write_report
from voxmeet.harness.scenario import ScenarioConfig, run_scenario
from voxmeet.harness.service import ServiceTimes, measure_codec_times, resolve_service

__all__ = [
    "DelayStats",
    "Link",
    "LinkModel",
    "MetricsReport",
    "ScenarioConfig",
    "ServiceTimes",
    "SkewStats",
    "delay_stats",
    "link_transfer",
    "measure_codec_times",
    "read_report",
    "resolve_service",
    "run_scenario",
    "series_stats",
    "skew_stats",
    "throughput_series",
    "write_report",
]
