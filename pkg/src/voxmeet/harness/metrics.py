"""Objective metrics: throughput windows, end-to-end delay, inter-stream skew."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from voxmeet.client import RenderSink
from voxmeet.errors import NoData


@dataclass(frozen=True)
class DelayStats:
    mean_ms: float
    stdv_ms: float
    p95_ms: float
    count: int


@dataclass(frozen=True)
class SkewStats:
    max_ms: float
    mean_ms: float
    events: int


def throughput_series(
    deliveries: list[tuple[int, int]], window_s: float = 1.0
) -> list[int]:
    """Bits delivered per consecutive window for one stream.

    deliveries: (t_deliver_us, nbytes) sorted by delivery time; windows
    start at t = 0 and cover through the last delivery, so the window sum
    equals the total bytes exactly.
    """
    if not deliveries:
        return []
    window_us = int(window_s * 1e6)
    last = deliveries[-1][0]
    series = [0] * (last // window_us + 1)
    for t, nbytes in deliveries:
        series[t // window_us] += 8 * nbytes
    return series


def series_stats(series: list[int], window_s: float = 1.0):
    """(mean_bps, stdv_bps, cov) over the per-window bitrates."""
    if not series:
        raise NoData("no throughput windows")
    bps = np.asarray(series, dtype=np.float64) / window_s
    mean = float(bps.mean())
    stdv = float(bps.std())
    return mean, stdv, (stdv / mean if mean > 0 else 0.0)


def nearest_rank_p95(values_sorted) -> float:
    """Smallest sample with more than 95% of the distribution at or below it."""
    n = len(values_sorted)
    return float(values_sorted[min(n - 1, math.floor(0.95 * n))])


def delay_stats(
    pairs: list[tuple[int, int, int]],
    sender_offset_us: int = 0,
    receiver_offset_us: int = 0,
) -> DelayStats:
    """Per-stream delay statistics in milliseconds.

    pairs: (seq, capture_ts_us, render_ts_us) as recorded by the sink.
    Per-frame delay = (render - receiver_offset) - (capture - sender_offset):
    with zero offsets this is the raw (NTP-residual) measurement, with the
    true offsets it is the corrected one.
    """
    if not pairs:
        raise NoData("no delay samples")
    delays_us = np.array(
        [
            (render - receiver_offset_us) - (capture - sender_offset_us)
            for _, capture, render in pairs
        ],
        dtype=np.float64,
    )
    delays_ms = delays_us / 1000.0
    return DelayStats(
        mean_ms=float(delays_ms.mean()),
        stdv_ms=float(delays_ms.std()),
        p95_ms=nearest_rank_p95(np.sort(delays_ms)),
        count=len(pairs),
    )


def skew_stats(sink: RenderSink) -> SkewStats:
    """Spread of latest-rendered capture timestamps across remote sources.

    At each render event (once every source has rendered at least one
    frame), skew = max - min of the per-source latest capture_ts. Raises
    NoData with fewer than two remote sources.
    """
    sources = {s for _, s, _ in sink.events}
    if len(sources) < 2:
        raise NoData("need at least two remote sources for skew")
    latest: dict[int, int] = {}
    skews_us = []
    for _, source, capture_ts in sink.events:
        latest[source] = capture_ts
        if len(latest) == len(sources):
            vals = latest.values()
            skews_us.append(max(vals) - min(vals))
    if not skews_us:
        raise NoData("sources never overlapped")
    arr = np.asarray(skews_us, dtype=np.float64) / 1000.0
    return SkewStats(max_ms=float(arr.max()), mean_ms=float(arr.mean()), events=len(arr))
