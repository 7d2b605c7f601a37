"""Core capture-side data types: camera model, images, point-cloud frames."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from voxmeet.errors import DimensionError, InvalidTransform

RIGID_TOL = 1e-6


def check_rigid(matrix: np.ndarray) -> np.ndarray:
    """Validate a 4x4 rigid transform and return it as float64.

    The upper-left 3x3 block must be orthonormal (R^T R = I within 1e-6)
    with determinant +1, and the bottom row must be (0, 0, 0, 1).
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.shape != (4, 4):
        raise InvalidTransform(f"expected 4x4 matrix, got shape {m.shape}")
    r = m[:3, :3]
    if not np.allclose(r.T @ r, np.eye(3), atol=RIGID_TOL):
        raise InvalidTransform("rotation block is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > 1e-5:
        raise InvalidTransform("rotation block determinant is not +1")
    if not np.allclose(m[3], (0.0, 0.0, 0.0, 1.0), atol=RIGID_TOL):
        raise InvalidTransform("bottom row must be (0, 0, 0, 1)")
    return m


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: intrinsics in pixels plus a camera->world extrinsic."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    extrinsic: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point must lie inside the image")
        m = check_rigid(self.extrinsic)
        m.flags.writeable = False
        object.__setattr__(self, "extrinsic", m)

    def intrinsic_matrix(self) -> np.ndarray:
        """Reconstruct the full 4x4 intrinsic matrix from fx, fy, cx, cy."""
        k = np.eye(4)
        k[0, 0], k[1, 1] = self.fx, self.fy
        k[0, 2], k[1, 2] = self.cx, self.cy
        return k


@dataclass
class DepthImage:
    """Per-pixel depth in millimeters; 0 marks invalid/background pixels."""

    width: int
    height: int
    data: np.ndarray  # (height, width) uint16

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.uint16)
        if d.size != self.width * self.height:
            raise DimensionError(
                f"depth data has {d.size} pixels, expected {self.width * self.height}"
            )
        self.data = d.reshape(self.height, self.width)


@dataclass
class ColorImage:
    """Per-pixel 8-bit RGB, dimensions matching the paired depth image."""

    width: int
    height: int
    data: np.ndarray  # (height, width, 3) uint8

    def __post_init__(self):
        d = np.asarray(self.data, dtype=np.uint8)
        if d.size != self.width * self.height * 3:
            raise DimensionError(
                f"color data has {d.size} bytes, expected {self.width * self.height * 3}"
            )
        self.data = d.reshape(self.height, self.width, 3)


@dataclass
class PointCloudFrame:
    """Timestamped colored point set; the unit of capture and playout.

    points are (N, 3) float64 meters, colors (N, 3) uint8, one color per
    point. seq increases strictly per source.
    """

    source_id: int
    seq: int
    capture_ts_us: int
    points: np.ndarray
    colors: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        c = np.asarray(self.colors, dtype=np.uint8).reshape(-1, 3)
        if len(p) != len(c):
            raise DimensionError(f"{len(p)} points but {len(c)} colors")
        if len(p) and not np.isfinite(p).all():
            raise ValueError("point coordinates must be finite")
        self.points = p
        self.colors = c

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class SceneConfig:
    """Synthetic-scene knobs for the procedural capture source.

    target_points sets the foreground point budget the renderer aims for;
    the moving-figure proxy is scaled to hit it under the default camera.
    """

    seed: int = 0
    target_points: int = 50_000
    motion_amplitude: float = 0.25
    camera_distance: float = 2.9

    def __post_init__(self):
        if self.target_points <= 0:
            raise ValueError("target_points must be positive")
        if self.motion_amplitude < 0:
            raise ValueError("motion_amplitude must be non-negative")
