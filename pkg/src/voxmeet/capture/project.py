"""Back-projection, rigid transforms, depth culling, and multi-view fusion."""

from __future__ import annotations

import numpy as np

from voxmeet.capture.types import (
    CameraModel,
    ColorImage,
    DepthImage,
    PointCloudFrame,
    check_rigid,
)
from voxmeet.errors import DimensionError, EmptyInput, FusionMismatch


def back_project(
    depth: DepthImage,
    color: ColorImage,
    cam: CameraModel,
    source_id: int = 0,
    seq: int = 0,
    capture_ts_us: int = 0,
) -> PointCloudFrame:
    """Lift a depth/color pair into a camera-space point cloud.

    Each valid pixel (u, v) with depth d mm becomes the point
    (x, y, z) = ((u-cx)z/fx, (v-cy)z/fy, d/1000) carrying that pixel's
    color. Zero-depth pixels produce no point; output order is the
    row-major pixel scan.
    """
    if (depth.width, depth.height) != (cam.width, cam.height):
        raise DimensionError(
            f"depth is {depth.width}x{depth.height}, camera expects {cam.width}x{cam.height}"
        )
    if (color.width, color.height) != (depth.width, depth.height):
        raise DimensionError(
            f"color is {color.width}x{color.height}, depth is {depth.width}x{depth.height}"
        )

    v, u = np.nonzero(depth.data)
    z = depth.data[v, u].astype(np.float64) / 1000.0
    x = (u - cam.cx) * z / cam.fx
    y = (v - cam.cy) * z / cam.fy
    return PointCloudFrame(
        source_id=source_id,
        seq=seq,
        capture_ts_us=capture_ts_us,
        points=np.column_stack([x, y, z]),
        colors=color.data[v, u],
    )


def transform_to_world(frame: PointCloudFrame, extrinsic: np.ndarray) -> PointCloudFrame:
    """Apply a rigid camera->world transform: every point becomes R p + t."""
    m = check_rigid(extrinsic)
    pts = frame.points @ m[:3, :3].T + m[:3, 3]
    return PointCloudFrame(
        source_id=frame.source_id,
        seq=frame.seq,
        capture_ts_us=frame.capture_ts_us,
        points=pts,
        colors=frame.colors,
    )


def fuse(frames: list[PointCloudFrame], capture_radius_m: float = 1.5) -> PointCloudFrame:
    """Merge world-space views of one subject into a single frame.

    Points are concatenated in input order; points whose horizontal
    distance from the rig origin (radius in the xz plane, y up) exceeds
    capture_radius_m are discarded. All inputs must agree on source and
    capture timestamp.
    """
    if not frames:
        raise EmptyInput("fuse needs at least one frame")
    first = frames[0]
    for f in frames[1:]:
        if f.source_id != first.source_id:
            raise FusionMismatch(
                f"source {f.source_id} does not match {first.source_id}"
            )
        if f.capture_ts_us != first.capture_ts_us:
            raise FusionMismatch("frames were not captured at the same instant")

    pts = np.concatenate([f.points for f in frames])
    cols = np.concatenate([f.colors for f in frames])
    keep = np.hypot(pts[:, 0], pts[:, 2]) <= capture_radius_m
    return PointCloudFrame(
        source_id=first.source_id,
        seq=first.seq,
        capture_ts_us=first.capture_ts_us,
        points=pts[keep],
        colors=cols[keep],
    )


def remove_background(depth: DepthImage, z_min_mm: int, z_max_mm: int) -> DepthImage:
    """Zero every pixel whose depth lies outside [z_min_mm, z_max_mm]."""
    if not 0 <= z_min_mm < z_max_mm:
        raise ValueError("require 0 <= z_min_mm < z_max_mm")
    data = depth.data.copy()
    data[(data < z_min_mm) | (data > z_max_mm)] = 0
    return DepthImage(depth.width, depth.height, data)
