"""Independent reference implementations used to cross-check the codec
and harness. Everything here is deliberately naive: bit loops, recursive
trees, O(n^2) scans, hand-stepped queues.
"""

from collections import deque

import numpy as np


def morton_oracle(ix, iy, iz, depth):
    """Bit-by-bit interleave: x bit at 3j, y at 3j+1, z at 3j+2."""
    out = []
    for x, y, z in zip(ix, iy, iz):
        code = 0
        for j in range(depth):
            code |= ((int(x) >> j) & 1) << (3 * j)
            code |= ((int(y) >> j) & 1) << (3 * j + 1)
            code |= ((int(z) >> j) & 1) << (3 * j + 2)
        out.append(code)
    return out


def occupancy_oracle(ijk: np.ndarray, depth: int) -> bytes:
    """Breadth-first occupancy bytes via an explicit tree walk.

    ijk: (n, 3) integer grid coordinates in [0, 2^depth). Duplicates are
    fine; occupancy only cares about presence.
    """
    if len(ijk) == 0:
        return b""
    out = bytearray()
    queue = deque([(np.asarray(ijk, dtype=np.int64), 0)])
    while queue:
        pts, level = queue.popleft()
        if level == depth:
            continue
        shift = depth - level - 1
        child = (
            ((pts[:, 0] >> shift) & 1)
            + 2 * ((pts[:, 1] >> shift) & 1)
            + 4 * ((pts[:, 2] >> shift) & 1)
        )
        byte = 0
        for k in range(8):
            sub = pts[child == k]
            if len(sub):
                byte |= 1 << k
                queue.append((sub, level + 1))
        out.append(byte)
    return bytes(out)


def occupied_voxel_count(points: np.ndarray, center, side: float, depth: int) -> int:
    """Distinct occupied cells, by direct quantization into a set."""
    origin = np.asarray(center, dtype=np.float64) - side / 2.0
    cell = side / (1 << depth)
    seen = set()
    for p in points:
        ijk = tuple(int(np.floor((p[a] - origin[a]) / cell)) for a in range(3))
        if all(0 <= v < (1 << depth) for v in ijk):
            seen.add(ijk)
    return len(seen)


def max_nn_distance(decoded: np.ndarray, original: np.ndarray) -> float:
    """Max over decoded points of the distance to the nearest original point.

    O(n*m) brute force; keep inputs small.
    """
    worst = 0.0
    for p in decoded:
        d2 = ((original - p) ** 2).sum(axis=1).min()
        worst = max(worst, float(np.sqrt(d2)))
    return worst


def rle_oracle(values) -> bytes:
    """Scalar-loop run-length encoding: (run<=255, value) byte pairs."""
    out = bytearray()
    values = list(values)
    i = 0
    while i < len(values):
        j = i
        while j < len(values) and values[j] == values[i] and j - i < 255:
            j += 1
        out += bytes((j - i, values[i]))
        i = j
    return bytes(out)


class TokenBucketOracle:
    """Hand-stepped token-bucket link model.

    Tokens (bits) accrue at rate_bps up to capacity; the bucket starts
    empty; messages finish serializing once their bits are covered, FIFO.
    Serialization state is continuous; the reported delivery time rounds
    up to whole microseconds, adds base_delay and jitter, and is clamped
    to preserve order.
    """

    def __init__(self, rate_bps: float, capacity_bits: float, base_delay_us: int):
        self.rate = rate_bps
        self.cap = capacity_bits
        self.base = base_delay_us
        self.tokens = 0.0
        self.finish = 0.0
        self.prev_delivery = 0

    def send(self, t_send_us: int, nbytes: int, jitter_us: int = 0) -> int:
        start = max(float(t_send_us), self.finish)
        self.tokens = min(self.cap, self.tokens + (start - self.finish) * self.rate / 1e6)
        bits = 8 * nbytes
        if bits <= self.tokens:
            self.tokens -= bits
            self.finish = start
        else:
            wait = (bits - self.tokens) / self.rate * 1e6
            self.finish = start + wait
            self.tokens = 0.0
        delivery = max(int(np.ceil(self.finish)) + self.base + jitter_us, self.prev_delivery)
        self.prev_delivery = delivery
        return delivery
