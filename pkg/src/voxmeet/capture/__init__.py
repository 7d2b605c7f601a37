"""Synthetic RGB-D capture and point-cloud reconstruction."""

from voxmeet.capture.project import back_project, fuse, remove_background, transform_to_world
from voxmeet.capture.synth import default_camera, synth_capture
from voxmeet.capture.types import (
    CameraModel,
    ColorImage,
    DepthImage,
    PointCloudFrame,
    SceneConfig,
)

__all__ = [
    "CameraModel",
    "ColorImage",
    "DepthImage",
    "PointCloudFrame",
    "SceneConfig",
    "back_project",
    "default_camera",
    "fuse",
    "remove_background",
    "synth_capture",
    "transform_to_world",
]
