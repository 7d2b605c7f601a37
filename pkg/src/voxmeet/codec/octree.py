"""Cubic bounding boxes, voxelization, and octree occupancy geometry."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from voxmeet.capture.types import PointCloudFrame
from voxmeet.codec import kernels
from voxmeet.errors import EmptyFrame

MIN_SIDE = 1e-6
BBOX_EXPAND = 1.01


@dataclass
class VoxelSet:
    """Occupied leaf cells of an octree: sorted unique Morton codes + colors."""

    depth: int
    codes: np.ndarray  # (n,) uint64, strictly ascending
    colors: np.ndarray  # (n, 3) uint8

    def __post_init__(self):
        self.codes = np.ascontiguousarray(self.codes, dtype=np.uint64)
        self.colors = np.ascontiguousarray(self.colors, dtype=np.uint8).reshape(-1, 3)
        if self.codes.size != len(self.colors):
            raise ValueError("codes and colors must pair up")
        if self.codes.size:
            if not (self.codes[1:] > self.codes[:-1]).all():
                raise ValueError("morton codes must be strictly ascending")
            if int(self.codes[-1]) >= 8**self.depth:
                raise ValueError("morton code exceeds 8^depth")

    def __len__(self) -> int:
        return int(self.codes.size)


def compute_bbox(frame: PointCloudFrame):
    """Smallest axis-aligned cube holding every point, padded by 1%.

    Returns (center, side). The padding keeps max-face points strictly
    inside so voxel indices never land on 2^depth.
    """
    if len(frame) == 0:
        raise EmptyFrame("cannot bound an empty frame")
    lo = frame.points.min(axis=0)
    hi = frame.points.max(axis=0)
    side = max(float((hi - lo).max()) * BBOX_EXPAND, MIN_SIDE)
    return (lo + hi) / 2.0, side


def voxelize(frame: PointCloudFrame, bbox, depth: int):
    """Map points onto the 2^depth grid inside bbox.

    Duplicate cells merge with component-wise rounded-mean color; cells
    come out in ascending Morton order. Points outside the bbox are
    dropped. Returns (VoxelSet, dropped_count).
    """
    center, side = bbox
    n_cells = 1 << depth
    origin = np.asarray(center, dtype=np.float64) - side / 2.0
    if len(frame) == 0:
        return VoxelSet(depth, np.empty(0, np.uint64), np.empty((0, 3), np.uint8)), 0

    ijk = np.floor((frame.points - origin) / (side / n_cells)).astype(np.int64)
    inside = ((ijk >= 0) & (ijk < n_cells)).all(axis=1)
    dropped = int(len(frame) - inside.sum())
    ijk = ijk[inside]
    colors = frame.colors[inside]

    codes = kernels.morton_encode(
        ijk[:, 0].astype(np.uint64), ijk[:, 1].astype(np.uint64), ijk[:, 2].astype(np.uint64)
    )
    order = np.argsort(codes)
    merged_codes, merged_colors = kernels.merge_duplicate_cells(codes[order], colors[order])
    return VoxelSet(depth, merged_codes, merged_colors), dropped


def encode_geometry(voxels: VoxelSet) -> bytes:
    """Serialize occupancy breadth-first, one byte per occupied internal node."""
    return kernels.occupancy_encode(voxels.codes, voxels.depth)


def decode_geometry(data: bytes, depth: int, bbox):
    """Rebuild leaf cells from an occupancy stream.

    Returns (codes, points): ascending Morton codes and the geometric
    centers of their cells. Raises BitstreamError on truncated or
    oversized streams.
    """
    center, side = bbox
    codes = kernels.occupancy_decode(data, depth)
    n_cells = 1 << depth
    cell = side / n_cells
    origin = np.asarray(center, dtype=np.float64) - side / 2.0
    ix, iy, iz = kernels.morton_decode(codes)
    pts = np.empty((codes.size, 3), dtype=np.float64)
    pts[:, 0] = origin[0] + (ix.astype(np.float64) + 0.5) * cell
    pts[:, 1] = origin[1] + (iy.astype(np.float64) + 0.5) * cell
    pts[:, 2] = origin[2] + (iz.astype(np.float64) + 0.5) * cell
    return codes, pts
