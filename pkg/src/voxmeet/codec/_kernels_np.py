"""Pure-numpy implementations of the codec hot kernels.

This module mirrors voxmeet.codec._kernels_cy bit for bit; the dispatcher
in voxmeet.codec.kernels picks whichever is available. Keep the two in
sync: the parity tests compare them on random inputs.
"""

from __future__ import annotations

import numpy as np

from voxmeet.errors import BitstreamError

_U = np.uint64


def _spread3(v: np.ndarray) -> np.ndarray:
    """Spread the low 21 bits of each value so consecutive bits sit 3 apart."""
    v = v.astype(np.uint64) & _U(0x1FFFFF)
    v = (v | (v << _U(32))) & _U(0x1F00000000FFFF)
    v = (v | (v << _U(16))) & _U(0x1F0000FF0000FF)
    v = (v | (v << _U(8))) & _U(0x100F00F00F00F00F)
    v = (v | (v << _U(4))) & _U(0x10C30C30C30C30C3)
    v = (v | (v << _U(2))) & _U(0x1249249249249249)
    return v


def _compact3(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.uint64) & _U(0x1249249249249249)
    v = (v ^ (v >> _U(2))) & _U(0x10C30C30C30C30C3)
    v = (v ^ (v >> _U(4))) & _U(0x100F00F00F00F00F)
    v = (v ^ (v >> _U(8))) & _U(0x1F0000FF0000FF)
    v = (v ^ (v >> _U(16))) & _U(0x1F00000000FFFF)
    v = (v ^ (v >> _U(32))) & _U(0x1FFFFF)
    return v


def morton_encode(ix: np.ndarray, iy: np.ndarray, iz: np.ndarray) -> np.ndarray:
    """Interleave grid coordinates into Morton codes (x lowest bit)."""
    return _spread3(ix) | (_spread3(iy) << _U(1)) | (_spread3(iz) << _U(2))


def morton_decode(codes: np.ndarray):
    codes = codes.astype(np.uint64)
    return _compact3(codes), _compact3(codes >> _U(1)), _compact3(codes >> _U(2))


def occupancy_encode(codes: np.ndarray, depth: int) -> bytes:
    """Breadth-first occupancy bytes for a sorted, unique leaf-code set.

    One byte per occupied internal node, level by level from the root;
    bit k (LSB first) marks child k occupied. Leaves emit nothing.
    """
    codes = codes.astype(np.uint64)
    if codes.size == 0:
        return b""
    out = bytearray()
    for level in range(depth):
        child = codes >> _U(3 * (depth - level - 1))
        if level < depth - 1:
            keep = np.empty(child.shape, bool)
            keep[0] = True
            np.not_equal(child[1:], child[:-1], out=keep[1:])
            child = child[keep]
        parent = child >> _U(3)
        bits = (_U(1) << (child & _U(7))).astype(np.uint8)
        starts = np.empty(parent.shape, bool)
        starts[0] = True
        np.not_equal(parent[1:], parent[:-1], out=starts[1:])
        out += np.bitwise_or.reduceat(bits, np.flatnonzero(starts)).tobytes()
    return bytes(out)


def occupancy_decode(data: bytes, depth: int) -> np.ndarray:
    """Rebuild the sorted leaf-code set from a breadth-first occupancy stream."""
    if len(data) == 0:
        return np.empty(0, dtype=np.uint64)
    buf = np.frombuffer(data, dtype=np.uint8)
    nodes = np.zeros(1, dtype=np.uint64)
    offset = 0
    child_ids = np.arange(8, dtype=np.uint64)
    for _ in range(depth):
        if nodes.size == 0:
            break
        need = nodes.size
        if offset + need > buf.size:
            raise BitstreamError("occupancy stream truncated", offset=len(data))
        level_bytes = buf[offset : offset + need]
        offset += need
        occupied = np.unpackbits(level_bytes, bitorder="little").reshape(-1, 8)
        children = (nodes[:, None] << _U(3)) | child_ids[None, :]
        nodes = children[occupied.astype(bool)]
    if offset != buf.size:
        raise BitstreamError("trailing bytes after occupancy stream", offset=offset)
    return nodes


def merge_duplicate_cells(codes_sorted: np.ndarray, colors_sorted: np.ndarray):
    """Collapse equal consecutive codes, averaging colors (rounded half up)."""
    n = codes_sorted.size
    if n == 0:
        return codes_sorted.astype(np.uint64), colors_sorted.astype(np.uint8).reshape(0, 3)
    keep = np.empty(n, bool)
    keep[0] = True
    np.not_equal(codes_sorted[1:], codes_sorted[:-1], out=keep[1:])
    starts = np.flatnonzero(keep)
    counts = np.diff(np.append(starts, n))
    sums = np.add.reduceat(colors_sorted.astype(np.int64), starts, axis=0)
    merged = (2 * sums + counts[:, None]) // (2 * counts[:, None])
    return codes_sorted[starts].astype(np.uint64), merged.astype(np.uint8)


def rle_encode(values: np.ndarray) -> bytes:
    """Run-length encode bytes as (run u8 in 1..255, value u8) pairs."""
    values = np.ascontiguousarray(values, dtype=np.uint8)
    if values.size == 0:
        return b""
    breaks = np.empty(values.size, bool)
    breaks[0] = True
    np.not_equal(values[1:], values[:-1], out=breaks[1:])
    starts = np.flatnonzero(breaks)
    lens = np.diff(np.append(starts, values.size))
    vals = values[starts]

    full = lens // 255
    rem = lens % 255
    chunks = full + (rem > 0)
    ends = np.cumsum(chunks)
    out = np.empty((int(ends[-1]), 2), dtype=np.uint8)
    out[:, 0] = 255
    has_rem = rem > 0
    out[ends[has_rem] - 1, 0] = rem[has_rem]
    out[:, 1] = np.repeat(vals, chunks)
    return out.tobytes()


def rle_decode(data: bytes, offset: int, count: int):
    """Decode exactly `count` values starting at `offset`.

    Returns (values, new_offset). Raises BitstreamError when runs do not
    land exactly on `count` or the buffer ends early.
    """
    if count == 0:
        return np.empty(0, dtype=np.uint8), offset
    buf = np.frombuffer(data, dtype=np.uint8)
    runs = buf[offset::2]
    if runs.size == 0:
        raise BitstreamError("run-length stream truncated", offset=len(data))
    cum = np.cumsum(runs.astype(np.int64))
    k = int(np.searchsorted(cum, count))
    if k >= runs.size:
        raise BitstreamError("run-length stream truncated", offset=len(data))
    if cum[k] != count:
        raise BitstreamError("run-length runs overshoot plane size", offset=offset + 2 * k)
    last_val_pos = offset + 2 * k + 1
    if last_val_pos >= buf.size:
        raise BitstreamError("run-length stream truncated", offset=len(data))
    lens = runs[: k + 1]
    if (lens == 0).any():
        bad = int(np.flatnonzero(lens == 0)[0])
        raise BitstreamError("zero-length run", offset=offset + 2 * bad)
    vals = buf[offset + 1 : last_val_pos + 1 : 2]
    return np.repeat(vals, lens), offset + 2 * (k + 1)
