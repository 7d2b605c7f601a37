"""Frame-level encode/decode and the normative bitstream serialization.

Layout (big-endian, see docs/BITSTREAM.md): magic "PCF1", source_id u32,
seq u32, capture_ts_us u64, point_count u32, octree_depth u8,
color_mode u8, bbox center 3xf32, side f32, geometry_len u32, geometry,
color_len u32, color.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from voxmeet.capture.types import PointCloudFrame
from voxmeet.codec.colors import decompress_colors, grid_dims, pack_colors, compress_colors
from voxmeet.codec.config import COLOR_MODE_IDS, COLOR_MODE_NAMES, CodecConfig
from voxmeet.codec.octree import compute_bbox, decode_geometry, encode_geometry, voxelize
from voxmeet.errors import BitstreamError, HeaderError

MAGIC = b"PCF1"
_HEADER = struct.Struct(">4sIIQIBBffffI")
_LEN = struct.Struct(">I")


@dataclass
class EncodedFrame:
    """Serialized codec output: header fields plus geometry/color payloads."""

    source_id: int
    seq: int
    capture_ts_us: int
    point_count: int
    octree_depth: int
    bbox_center: tuple[float, float, float]
    bbox_side: float
    color_mode: str
    geometry: bytes
    color: bytes
    dropped_points: int = field(default=0, compare=False)  # encoder-side, not serialized

    def to_bytes(self) -> bytes:
        head = _HEADER.pack(
            MAGIC,
            self.source_id,
            self.seq,
            self.capture_ts_us,
            self.point_count,
            self.octree_depth,
            COLOR_MODE_IDS[self.color_mode],
            self.bbox_center[0],
            self.bbox_center[1],
            self.bbox_center[2],
            self.bbox_side,
            len(self.geometry),
        )
        return head + self.geometry + _LEN.pack(len(self.color)) + self.color

    @classmethod
    def from_bytes(cls, data: bytes) -> "EncodedFrame":
        if len(data) < _HEADER.size:
            raise BitstreamError("frame header truncated", offset=len(data))
        (
            magic,
            source_id,
            seq,
            capture_ts_us,
            point_count,
            depth,
            mode_id,
            cx,
            cy,
            cz,
            side,
            geometry_len,
        ) = _HEADER.unpack_from(data)
        if magic != MAGIC:
            raise BitstreamError(f"bad magic {magic!r}", offset=0)
        if mode_id not in COLOR_MODE_NAMES:
            raise BitstreamError(f"unknown color mode {mode_id}", offset=21)
        if not 1 <= depth <= 16:
            raise BitstreamError(f"octree depth {depth} out of range", offset=20)
        pos = _HEADER.size
        if len(data) < pos + geometry_len + _LEN.size:
            raise BitstreamError("geometry payload truncated", offset=len(data))
        geometry = data[pos : pos + geometry_len]
        pos += geometry_len
        (color_len,) = _LEN.unpack_from(data, pos)
        pos += _LEN.size
        if len(data) < pos + color_len:
            raise BitstreamError("color payload truncated", offset=len(data))
        color = data[pos : pos + color_len]
        pos += color_len
        if pos != len(data):
            raise BitstreamError("trailing bytes after frame", offset=pos)
        return cls(
            source_id=source_id,
            seq=seq,
            capture_ts_us=capture_ts_us,
            point_count=point_count,
            octree_depth=depth,
            bbox_center=(cx, cy, cz),
            bbox_side=side,
            color_mode=COLOR_MODE_NAMES[mode_id],
            geometry=geometry,
            color=color,
        )


def encode_frame(frame: PointCloudFrame, cfg: CodecConfig) -> EncodedFrame:
    """Voxelize and serialize one frame. Intra-only: no state is carried.

    With a fixed bbox, out-of-box points are dropped (counted in
    dropped_points). A frame that ends up empty still encodes, with
    point_count 0.
    """
    if cfg.bbox_mode == "fixed" or len(frame) == 0:
        center = np.array(cfg.bbox_center, dtype=np.float64)
        side = cfg.bbox_side
    else:
        center, side = compute_bbox(frame)
    # Quantize the bbox to f32 up front so encoder and decoder share the
    # exact grid the header can represent.
    center = np.asarray(np.asarray(center, dtype=np.float32), dtype=np.float64)
    side = float(np.float32(side))

    voxels, dropped = voxelize(frame, (center, side), cfg.octree_depth)
    geometry = encode_geometry(voxels)
    color = compress_colors(pack_colors(voxels), cfg)
    return EncodedFrame(
        source_id=frame.source_id,
        seq=frame.seq,
        capture_ts_us=frame.capture_ts_us,
        point_count=len(voxels),
        octree_depth=cfg.octree_depth,
        bbox_center=(float(center[0]), float(center[1]), float(center[2])),
        bbox_side=side,
        color_mode=cfg.color_mode,
        geometry=geometry,
        color=color,
        dropped_points=dropped,
    )


def decode_frame(enc: EncodedFrame) -> PointCloudFrame:
    """Reconstruct points at leaf-cell centers with their decoded colors."""
    center = np.array(enc.bbox_center, dtype=np.float64)
    codes, points = decode_geometry(enc.geometry, enc.octree_depth, (center, enc.bbox_side))
    if len(points) != enc.point_count:
        raise HeaderError(
            f"header says {enc.point_count} points, geometry decodes to {len(points)}"
        )
    width, height = grid_dims(enc.point_count)
    cfg = CodecConfig(octree_depth=enc.octree_depth, color_mode=enc.color_mode)
    colors = decompress_colors(enc.color, cfg, width, height, enc.point_count)
    return PointCloudFrame(
        source_id=enc.source_id,
        seq=enc.seq,
        capture_ts_us=enc.capture_ts_us,
        points=points,
        colors=colors,
    )
