"""Real-time point-cloud codec: octree geometry + 2D-grid color planes."""

from voxmeet.codec.colors import (
    ColorGrid,
    compress_colors,
    decompress_colors,
    grid_dims,
    pack_colors,
    unpack_colors,
)
from voxmeet.codec.config import COLOR_QUANT, COLOR_RAW, CodecConfig
from voxmeet.codec.frame import EncodedFrame, decode_frame, encode_frame
from voxmeet.codec.kernels import active_backend
from voxmeet.codec.octree import (
    VoxelSet,
    compute_bbox,
    decode_geometry,
    encode_geometry,
    voxelize,
)

__all__ = [
    "COLOR_QUANT",
    "COLOR_RAW",
    "CodecConfig",
    "ColorGrid",
    "EncodedFrame",
    "VoxelSet",
    "active_backend",
    "compress_colors",
    "compute_bbox",
    "decode_frame",
    "decode_geometry",
    "decompress_colors",
    "encode_frame",
    "encode_geometry",
    "grid_dims",
    "pack_colors",
    "unpack_colors",
    "voxelize",
]
