# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled codec hot kernels.

Byte-for-byte equivalent to voxmeet.codec._kernels_np; the parity tests
hold both to the same outputs. Keep the two in sync.
"""

import numpy as np

from voxmeet.errors import BitstreamError

ctypedef unsigned long long u64
ctypedef unsigned char u8


cdef inline u64 _spread3(u64 v) nogil:
    v &= 0x1FFFFFULL
    v = (v | (v << 32)) & 0x1F00000000FFFFULL
    v = (v | (v << 16)) & 0x1F0000FF0000FFULL
    v = (v | (v << 8)) & 0x100F00F00F00F00FULL
    v = (v | (v << 4)) & 0x10C30C30C30C30C3ULL
    v = (v | (v << 2)) & 0x1249249249249249ULL
    return v


cdef inline u64 _compact3(u64 v) nogil:
    v &= 0x1249249249249249ULL
    v = (v ^ (v >> 2)) & 0x10C30C30C30C30C3ULL
    v = (v ^ (v >> 4)) & 0x100F00F00F00F00FULL
    v = (v ^ (v >> 8)) & 0x1F0000FF0000FFULL
    v = (v ^ (v >> 16)) & 0x1F00000000FFFFULL
    v = (v ^ (v >> 32)) & 0x1FFFFFULL
    return v


def morton_encode(ix, iy, iz):
    """Interleave grid coordinates into Morton codes (x lowest bit)."""
    cdef u64[::1] x = np.ascontiguousarray(ix, dtype=np.uint64)
    cdef u64[::1] y = np.ascontiguousarray(iy, dtype=np.uint64)
    cdef u64[::1] z = np.ascontiguousarray(iz, dtype=np.uint64)
    cdef Py_ssize_t n = x.shape[0], i
    out = np.empty(n, dtype=np.uint64)
    cdef u64[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _spread3(x[i]) | (_spread3(y[i]) << 1) | (_spread3(z[i]) << 2)
    return out


def morton_decode(codes):
    cdef u64[::1] c = np.ascontiguousarray(codes, dtype=np.uint64)
    cdef Py_ssize_t n = c.shape[0], i
    ox_a = np.empty(n, dtype=np.uint64)
    oy_a = np.empty(n, dtype=np.uint64)
    oz_a = np.empty(n, dtype=np.uint64)
    cdef u64[::1] ox = ox_a
    cdef u64[::1] oy = oy_a
    cdef u64[::1] oz = oz_a
    with nogil:
        for i in range(n):
            ox[i] = _compact3(c[i])
            oy[i] = _compact3(c[i] >> 1)
            oz[i] = _compact3(c[i] >> 2)
    return ox_a, oy_a, oz_a


def occupancy_encode(codes, int depth):
    """Breadth-first occupancy bytes for a sorted, unique leaf-code set."""
    cdef u64[::1] c = np.ascontiguousarray(codes, dtype=np.uint64)
    cdef Py_ssize_t n = c.shape[0]
    if n == 0:
        return b""
    buf_a = np.empty(n * depth + depth, dtype=np.uint8)
    cdef u8[::1] buf = buf_a
    cdef Py_ssize_t w = 0, i
    cdef int level, shift
    cdef bint first
    cdef u64 child, prev_child = 0, parent, cur_parent = 0
    cdef u8 acc
    with nogil:
        for level in range(depth):
            shift = 3 * (depth - level - 1)
            first = True
            acc = 0
            for i in range(n):
                child = c[i] >> shift
                if not first and child == prev_child:
                    continue
                parent = child >> 3
                if first:
                    cur_parent = parent
                    first = False
                elif parent != cur_parent:
                    buf[w] = acc
                    w += 1
                    cur_parent = parent
                    acc = 0
                acc |= <u8> (1 << (child & 7))
                prev_child = child
            buf[w] = acc
            w += 1
    return np.asarray(buf_a[:w]).tobytes()


def occupancy_decode(data, int depth):
    """Rebuild the sorted leaf-code set from a breadth-first occupancy stream."""
    cdef Py_ssize_t nbytes = len(data)
    if nbytes == 0:
        return np.empty(0, dtype=np.uint64)
    cdef const u8[::1] buf = data
    nodes = np.zeros(1, dtype=np.uint64)
    cdef u64[::1] nv = nodes
    cdef u64[::1] cv
    cdef Py_ssize_t offset = 0, cnt = 1, out_n, i, j
    cdef int level, k
    cdef u8 b
    cdef u64 base
    for level in range(depth):
        if cnt == 0:
            break
        if offset + cnt > nbytes:
            raise BitstreamError("occupancy stream truncated", offset=nbytes)
        out_n = 0
        for i in range(cnt):
            b = buf[offset + i]
            for k in range(8):
                out_n += (b >> k) & 1
        children = np.empty(out_n, dtype=np.uint64)
        cv = children
        j = 0
        for i in range(cnt):
            b = buf[offset + i]
            base = nv[i] << 3
            for k in range(8):
                if b & (1 << k):
                    cv[j] = base | <u64> k
                    j += 1
        offset += cnt
        nodes = children
        nv = children
        cnt = out_n
    if offset != nbytes:
        raise BitstreamError("trailing bytes after occupancy stream", offset=offset)
    return nodes


def merge_duplicate_cells(codes_sorted, colors_sorted):
    """Collapse equal consecutive codes, averaging colors (rounded half up)."""
    cdef u64[::1] c = np.ascontiguousarray(codes_sorted, dtype=np.uint64)
    cdef const u8[:, ::1] col = np.ascontiguousarray(colors_sorted, dtype=np.uint8).reshape(-1, 3)
    cdef Py_ssize_t n = c.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.uint64), np.empty((0, 3), dtype=np.uint8)
    out_codes = np.empty(n, dtype=np.uint64)
    out_colors = np.empty((n, 3), dtype=np.uint8)
    cdef u64[::1] oc = out_codes
    cdef u8[:, ::1] ocol = out_colors
    cdef Py_ssize_t i, w = 0
    cdef long long sr = col[0, 0], sg = col[0, 1], sb = col[0, 2], cnt = 1
    cdef u64 cur = c[0]
    with nogil:
        for i in range(1, n):
            if c[i] == cur:
                sr += col[i, 0]
                sg += col[i, 1]
                sb += col[i, 2]
                cnt += 1
            else:
                oc[w] = cur
                ocol[w, 0] = <u8> ((2 * sr + cnt) // (2 * cnt))
                ocol[w, 1] = <u8> ((2 * sg + cnt) // (2 * cnt))
                ocol[w, 2] = <u8> ((2 * sb + cnt) // (2 * cnt))
                w += 1
                cur = c[i]
                sr = col[i, 0]
                sg = col[i, 1]
                sb = col[i, 2]
                cnt = 1
        oc[w] = cur
        ocol[w, 0] = <u8> ((2 * sr + cnt) // (2 * cnt))
        ocol[w, 1] = <u8> ((2 * sg + cnt) // (2 * cnt))
        ocol[w, 2] = <u8> ((2 * sb + cnt) // (2 * cnt))
        w += 1
    return out_codes[:w].copy(), out_colors[:w].copy()


def rle_encode(values):
    """Run-length encode bytes as (run u8 in 1..255, value u8) pairs."""
    cdef const u8[::1] v = np.ascontiguousarray(values, dtype=np.uint8)
    cdef Py_ssize_t n = v.shape[0]
    if n == 0:
        return b""
    out_a = np.empty(2 * n, dtype=np.uint8)
    cdef u8[::1] o = out_a
    cdef Py_ssize_t w = 0, i = 0, run
    cdef u8 val
    with nogil:
        while i < n:
            val = v[i]
            run = 1
            i += 1
            while i < n and v[i] == val and run < 255:
                run += 1
                i += 1
            o[w] = <u8> run
            o[w + 1] = val
            w += 2
    return np.asarray(out_a[:w]).tobytes()


def rle_decode(data, Py_ssize_t offset, Py_ssize_t count):
    """Decode exactly `count` values starting at `offset`."""
    if count == 0:
        return np.empty(0, dtype=np.uint8), offset
    cdef const u8[::1] buf = data
    cdef Py_ssize_t nbytes = buf.shape[0]
    out_a = np.empty(count, dtype=np.uint8)
    cdef u8[::1] o = out_a
    cdef Py_ssize_t w = 0, pos = offset, run, i
    cdef u8 val
    while w < count:
        if pos + 1 >= nbytes:
            raise BitstreamError("run-length stream truncated", offset=nbytes)
        run = buf[pos]
        if run == 0:
            raise BitstreamError("zero-length run", offset=pos)
        if w + run > count:
            raise BitstreamError("run-length runs overshoot plane size", offset=pos)
        val = buf[pos + 1]
        for i in range(run):
            o[w + i] = val
        w += run
        pos += 2
    return out_a, pos
