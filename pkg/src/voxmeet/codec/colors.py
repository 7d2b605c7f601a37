"""Morton-ordered color packing onto a 2D grid plus plane compression.

Two color modes exist: "raw" stores the valid region verbatim (lossless),
"quant" converts to integer YCbCr, subsamples chroma 2x2, quantizes each
plane uniformly, and run-length encodes the result. The exact integer
transforms are normative; see docs/BITSTREAM.md.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from voxmeet.codec import kernels
from voxmeet.codec.config import COLOR_RAW, CodecConfig
from voxmeet.codec.octree import VoxelSet
from voxmeet.errors import BitstreamError, SizeError


def grid_dims(n: int) -> tuple[int, int]:
    """Grid size for n colors: width = next multiple of 8 >= ceil(sqrt(n)),
    height = ceil(n / width) rounded up to a multiple of 8."""
    if n == 0:
        return 0, 0
    width = math.isqrt(n - 1) + 1  # ceil(sqrt(n)) in exact integer math
    width = (width + 7) // 8 * 8
    height = (n + width - 1) // width
    height = (height + 7) // 8 * 8
    return width, height


@dataclass
class ColorGrid:
    """Row-major color plane; the first n pixels are valid, the rest padding."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 3) uint8
    n: int

    def __post_init__(self):
        self.pixels = np.ascontiguousarray(self.pixels, dtype=np.uint8).reshape(
            self.height, self.width, 3
        )
        if self.width * self.height < self.n:
            raise ValueError("grid smaller than its valid color count")

    @property
    def capacity(self) -> int:
        return self.width * self.height


def pack_colors(voxels: VoxelSet) -> ColorGrid:
    """Write voxel colors row-major in Morton order, padding with the last color."""
    n = len(voxels)
    width, height = grid_dims(n)
    flat = np.empty((width * height, 3), dtype=np.uint8)
    flat[:n] = voxels.colors
    if n:
        flat[n:] = voxels.colors[-1]
    return ColorGrid(width, height, flat.reshape(height, width, 3), n)


def unpack_colors(grid: ColorGrid, n: int) -> np.ndarray:
    """First n pixels in row-major order."""
    if n > grid.capacity:
        raise SizeError(f"asked for {n} colors, grid holds {grid.capacity}")
    return grid.pixels.reshape(-1, 3)[:n].copy()


# --- integer YCbCr (full range, fixed point x256) ---------------------------

def rgb_to_ycbcr(rgb: np.ndarray):
    r = rgb[..., 0].astype(np.int32)
    g = rgb[..., 1].astype(np.int32)
    b = rgb[..., 2].astype(np.int32)
    y = (77 * r + 150 * g + 29 * b + 128) >> 8
    cb = ((-43 * r - 85 * g + 128 * b + 128) >> 8) + 128
    cr = ((128 * r - 107 * g - 21 * b + 128) >> 8) + 128
    clip = lambda p: np.clip(p, 0, 255).astype(np.uint8)
    return clip(y), clip(cb), clip(cr)


def ycbcr_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    yi = y.astype(np.int32)
    cbi = cb.astype(np.int32) - 128
    cri = cr.astype(np.int32) - 128
    r = yi + ((359 * cri + 128) >> 8)
    g = yi - ((88 * cbi + 183 * cri + 128) >> 8)
    b = yi + ((454 * cbi + 128) >> 8)
    out = np.stack([r, g, b], axis=-1)
    return np.clip(out, 0, 255).astype(np.uint8)


def _quantize(plane: np.ndarray, bits: int) -> np.ndarray:
    shift = 8 - bits
    if shift == 0:
        return plane
    half = 1 << (shift - 1)
    q = np.minimum((plane.astype(np.uint16) + half) >> shift, (1 << bits) - 1)
    return q.astype(np.uint8)


def _dequantize(q: np.ndarray, bits: int) -> np.ndarray:
    shift = 8 - bits
    if shift == 0:
        return q
    return (q.astype(np.uint16) << shift).astype(np.uint8)


def _subsample2x2(plane: np.ndarray) -> np.ndarray:
    h, w = plane.shape
    blocks = plane.astype(np.uint16).reshape(h // 2, 2, w // 2, 2)
    return ((blocks.sum(axis=(1, 3)) + 2) >> 2).astype(np.uint8)


def _upsample2x2(plane: np.ndarray) -> np.ndarray:
    return np.repeat(np.repeat(plane, 2, axis=0), 2, axis=1)


def compress_colors(grid: ColorGrid, cfg: CodecConfig) -> bytes:
    """Serialize a color grid under cfg.color_mode.

    raw: the valid region verbatim (3n bytes). quant: a 2-byte bit-depth
    header then run-length coded Y, Cb, Cr planes.
    """
    if grid.n == 0:
        return b""
    if cfg.color_mode == COLOR_RAW:
        return grid.pixels.reshape(-1, 3)[: grid.n].tobytes()

    y, cb, cr = rgb_to_ycbcr(grid.pixels)
    y_q = _quantize(y, cfg.luma_bits)
    cb_q = _quantize(_subsample2x2(cb), cfg.chroma_bits)
    cr_q = _quantize(_subsample2x2(cr), cfg.chroma_bits)
    return (
        bytes((cfg.luma_bits, cfg.chroma_bits))
        + kernels.rle_encode(y_q.ravel())
        + kernels.rle_encode(cb_q.ravel())
        + kernels.rle_encode(cr_q.ravel())
    )


def decompress_colors(
    data: bytes, cfg: CodecConfig, width: int, height: int, n: int
) -> np.ndarray:
    """Reconstruct the first n colors of a grid compressed by compress_colors."""
    if n == 0:
        if data:
            raise BitstreamError("color payload for an empty frame", offset=0)
        return np.empty((0, 3), dtype=np.uint8)
    if n > width * height:
        raise SizeError(f"asked for {n} colors, grid holds {width * height}")

    if cfg.color_mode == COLOR_RAW:
        if len(data) != 3 * n:
            raise BitstreamError(
                f"raw color payload is {len(data)} bytes, expected {3 * n}", offset=len(data)
            )
        return np.frombuffer(data, dtype=np.uint8).reshape(n, 3).copy()

    if len(data) < 2:
        raise BitstreamError("quant color payload missing bit-depth header", offset=0)
    luma_bits, chroma_bits = data[0], data[1]
    if not (2 <= luma_bits <= 8 and 2 <= chroma_bits <= 8):
        raise BitstreamError(f"bad bit depths ({luma_bits}, {chroma_bits})", offset=0)

    y_q, offset = kernels.rle_decode(data, 2, width * height)
    cb_q, offset = kernels.rle_decode(data, offset, (width // 2) * (height // 2))
    cr_q, offset = kernels.rle_decode(data, offset, (width // 2) * (height // 2))
    if offset != len(data):
        raise BitstreamError("trailing bytes after color planes", offset=offset)

    y = _dequantize(y_q, luma_bits).reshape(height, width)
    cb = _upsample2x2(_dequantize(cb_q, chroma_bits).reshape(height // 2, width // 2))
    cr = _upsample2x2(_dequantize(cr_q, chroma_bits).reshape(height // 2, width // 2))
    rgb = ycbcr_to_rgb(y, cb, cr)
    return rgb.reshape(-1, 3)[:n]
