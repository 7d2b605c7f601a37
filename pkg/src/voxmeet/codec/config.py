"""Codec configuration."""

from __future__ import annotations

from dataclasses import dataclass

COLOR_RAW = "raw"
COLOR_QUANT = "quant"

# Wire ids for the color_mode header byte.
COLOR_MODE_IDS = {COLOR_RAW: 0, COLOR_QUANT: 1}
COLOR_MODE_NAMES = {v: k for k, v in COLOR_MODE_IDS.items()}


@dataclass(frozen=True)
class CodecConfig:
    """Encoder settings.

    The defaults serve the real-time conferencing operating point:
    intra-only coding of ~50K-point frames at 15 fps inside a fixed 3 m
    cube, landing in the single-digit-Mbps range with quantized colors.
    Chroma is always subsampled 2x2 in quant mode.
    """

    octree_depth: int = 9
    bbox_mode: str = "fixed"  # "fixed" or "per_frame"
    bbox_center: tuple[float, float, float] = (0.0, 1.0, 0.0)
    bbox_side: float = 3.0
    color_mode: str = COLOR_QUANT
    luma_bits: int = 6
    chroma_bits: int = 4

    def __post_init__(self):
        if not 1 <= self.octree_depth <= 16:
            raise ValueError("octree_depth must be in [1, 16]")
        if self.bbox_mode not in ("fixed", "per_frame"):
            raise ValueError(f"unknown bbox_mode {self.bbox_mode!r}")
        if self.bbox_side <= 0:
            raise ValueError("bbox_side must be positive")
        if self.color_mode not in COLOR_MODE_IDS:
            raise ValueError(f"unknown color_mode {self.color_mode!r}")
        if not (2 <= self.luma_bits <= 8 and 2 <= self.chroma_bits <= 8):
            raise ValueError("luma_bits and chroma_bits must be in [2, 8]")
