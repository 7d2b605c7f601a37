"""Emulated access link: token bucket serialization, fixed delay, jitter.

The bucket holds up to bucket_s seconds of tokens (bits) and starts
empty, so a cold link behaves exactly like a line at bandwidth_bps and
burst credit only accrues over idle gaps. Delivery order per link is
preserved (reliable, in-order semantics); overload shows up as queuing
delay, never loss.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LinkModel:
    base_delay_us: int = 2_000
    jitter_us: int = 0
    bandwidth_bps: float = 200e6  # testbed default: 200 Mbps full duplex
    bucket_s: float = 0.25

    def __post_init__(self):
        if self.base_delay_us < 0:
            raise ValueError("base_delay_us must be >= 0")
        if self.jitter_us < 0:
            raise ValueError("jitter_us must be >= 0")
        if self.bandwidth_bps <= 0:
            raise ValueError("bandwidth_bps must be positive")


class Link:
    """One direction of one participant's access link."""

    def __init__(self, model: LinkModel, rng: np.random.Generator | None = None):
        self.model = model
        self._rng = rng
        self._tokens = 0.0
        # serialization state stays continuous; only delivery times are
        # rounded, so microsecond rounding never compounds through the queue
        self._finish = 0.0
        self._prev_delivery = 0

    def transfer(self, t_send_us: int, nbytes: int) -> int:
        """Delivery time for nbytes handed to the link at t_send_us.

        Serialization finishes once the token bucket has covered all bits
        (FIFO behind earlier messages), then base delay and a jitter
        sample apply. Send times must be non-decreasing.
        """
        m = self.model
        start = max(float(t_send_us), self._finish)
        self._tokens = min(
            m.bucket_s * m.bandwidth_bps,
            self._tokens + (start - self._finish) * m.bandwidth_bps / 1e6,
        )
        bits = 8 * nbytes
        if bits <= self._tokens:
            self._tokens -= bits
            finish = start
        else:
            finish = start + (bits - self._tokens) * 1e6 / m.bandwidth_bps
            self._tokens = 0.0
        self._finish = finish

        jitter = 0
        if m.jitter_us and self._rng is not None:
            jitter = int(self._rng.integers(-m.jitter_us, m.jitter_us + 1))
        delivery = max(int(math.ceil(finish)) + m.base_delay_us + jitter, self._prev_delivery)
        self._prev_delivery = delivery
        return delivery


def link_transfer(link: Link, nbytes: int, t_send_us: int) -> int:
    """Functional form of Link.transfer (delivery time in microseconds)."""
    return link.transfer(t_send_us, nbytes)
