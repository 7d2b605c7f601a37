"""Token-bucket link model against the hand-stepped oracle."""

import pytest

from oracles import TokenBucketOracle
from voxmeet.harness.link import Link, LinkModel, link_transfer


class TestAgainstOracle:
    def test_one_megabyte_over_8mbps(self):
        # Empty bucket, empty queue: serialization takes exactly 1.0 s.
        model = LinkModel(base_delay_us=0, jitter_us=0, bandwidth_bps=8e6)
        link = Link(model)
        oracle = TokenBucketOracle(8e6, 0.25 * 8e6, 0)
        got = link.transfer(0, 1_000_000)
        assert got == oracle.send(0, 1_000_000) == 1_000_000

    def test_random_traffic_matches_oracle(self, rng):
        # 1 us tolerance: the two implementations ceil at different points,
        # so float rounding can disagree by a single microsecond.
        model = LinkModel(base_delay_us=3_000, jitter_us=0, bandwidth_bps=5e6)
        link = Link(model)
        oracle = TokenBucketOracle(5e6, 0.25 * 5e6, 3_000)
        t = 0
        for _ in range(400):
            t += int(rng.integers(0, 30_000))
            nbytes = int(rng.integers(1, 40_000))
            assert abs(link.transfer(t, nbytes) - oracle.send(t, nbytes)) <= 1

    def test_idle_gap_accrues_burst_credit(self):
        model = LinkModel(base_delay_us=0, jitter_us=0, bandwidth_bps=8e6)
        link = Link(model)
        oracle = TokenBucketOracle(8e6, 0.25 * 8e6, 0)
        for t, n in ((0, 250_000), (2_000_000, 250_000), (2_000_001, 250_000)):
            assert link.transfer(t, n) == oracle.send(t, n)


def test_zero_byte_message_delivers_at_base_delay():
    link = Link(LinkModel(base_delay_us=7_500, jitter_us=0, bandwidth_bps=1e6))
    assert link.transfer(1_000, 0) == 8_500


def test_functional_wrapper():
    link = Link(LinkModel(base_delay_us=100, jitter_us=0, bandwidth_bps=1e9))
    assert link_transfer(link, 0, 5_000) == 5_100


def test_window_cap_under_sustained_overload():
    # Offered load 2x capacity: no 1 s window of deliveries may exceed
    # bandwidth by more than 1%.
    model = LinkModel(base_delay_us=1_000, jitter_us=0, bandwidth_bps=4e6)
    link = Link(model)
    deliveries = []
    nbytes = 1_000
    interval = 1_000  # 8 Mbps offered
    for k in range(10_000):
        deliveries.append((link.transfer(k * interval, nbytes), nbytes))
    last = deliveries[-1][0]
    for start in range(0, last - 1_000_000, 250_000):
        bits = sum(8 * n for t, n in deliveries if start <= t < start + 1_000_000)
        assert bits <= 4e6 * 1.01


def test_in_order_delivery_with_jitter(rng):
    model = LinkModel(base_delay_us=10_000, jitter_us=9_000, bandwidth_bps=1e9)
    link = Link(model, rng)
    times = [link.transfer(k * 100, 500) for k in range(2_000)]
    assert all(a <= b for a, b in zip(times, times[1:]))


def test_fifo_spacing_in_burst():
    model = LinkModel(base_delay_us=0, jitter_us=0, bandwidth_bps=8e6)
    link = Link(model)
    link.transfer(10_000_000, 0)  # let the bucket fill, then drain it
    link.transfer(10_000_000, int(0.25 * 8e6 / 8))
    t1 = link.transfer(10_000_000, 1_000)
    t2 = link.transfer(10_000_000, 1_000)
    assert t2 - t1 == 1_000  # 8000 bits / 8 Mbps = 1 ms apart


def test_model_validation():
    with pytest.raises(ValueError):
        LinkModel(base_delay_us=-1)
    with pytest.raises(ValueError):
        LinkModel(bandwidth_bps=0)
