"""Color grid packing and plane compression."""

import numpy as np
import pytest

from voxmeet.codec import (
    CodecConfig,
    ColorGrid,
    VoxelSet,
    compress_colors,
    decompress_colors,
    grid_dims,
    pack_colors,
    unpack_colors,
)
from voxmeet.errors import BitstreamError, SizeError

RAW = CodecConfig(color_mode="raw")
QUANT = CodecConfig(color_mode="quant")


def voxels_with_colors(colors):
    colors = np.asarray(colors, np.uint8).reshape(-1, 3)
    codes = np.arange(len(colors), dtype=np.uint64)
    return VoxelSet(8, codes, colors)


class TestGridDims:
    def test_one_color(self):
        assert grid_dims(1) == (8, 8)

    def test_hundred_colors(self):
        # ceil(sqrt(100)) = 10 -> width 16; ceil(100/16) = 7 -> height 8
        assert grid_dims(100) == (16, 8)

    def test_zero(self):
        assert grid_dims(0) == (0, 0)

    def test_capacity_always_sufficient(self):
        for n in (1, 7, 63, 64, 65, 100, 4096, 50_000, 123_457):
            w, h = grid_dims(n)
            assert w * h >= n
            assert w % 8 == 0 and h % 8 == 0


class TestPackUnpack:
    def test_single_color_fills_grid(self):
        grid = pack_colors(voxels_with_colors([[5, 6, 7]]))
        assert (grid.width, grid.height) == (8, 8)
        assert (grid.pixels.reshape(-1, 3) == [5, 6, 7]).all()

    def test_hundred_colors_layout(self, rng):
        colors = rng.integers(0, 256, (100, 3))
        grid = pack_colors(voxels_with_colors(colors))
        assert (grid.width, grid.height) == (16, 8)
        np.testing.assert_array_equal(grid.pixels.reshape(-1, 3)[:100], colors)
        # padding replicates the last valid color
        np.testing.assert_array_equal(
            grid.pixels.reshape(-1, 3)[100:], np.tile(colors[-1], (28, 1))
        )

    def test_roundtrip(self, rng):
        colors = rng.integers(0, 256, (77, 3))
        grid = pack_colors(voxels_with_colors(colors))
        np.testing.assert_array_equal(unpack_colors(grid, 77), colors)

    def test_unpack_zero(self):
        grid = pack_colors(voxels_with_colors([[1, 2, 3]]))
        assert unpack_colors(grid, 0).shape == (0, 3)

    def test_unpack_capacity(self):
        grid = pack_colors(voxels_with_colors([[1, 2, 3]]))
        assert len(unpack_colors(grid, 64)) == 64

    def test_unpack_too_many(self):
        grid = pack_colors(voxels_with_colors([[1, 2, 3]]))
        with pytest.raises(SizeError):
            unpack_colors(grid, 65)


class TestRawMode:
    def test_lossless_roundtrip(self, rng):
        colors = rng.integers(0, 256, (321, 3))
        grid = pack_colors(voxels_with_colors(colors))
        data = compress_colors(grid, RAW)
        assert len(data) == 3 * 321
        out = decompress_colors(data, RAW, grid.width, grid.height, 321)
        np.testing.assert_array_equal(out, colors)

    def test_wrong_length_rejected(self):
        with pytest.raises(BitstreamError):
            decompress_colors(b"\x00" * 10, RAW, 8, 8, 4)


class TestQuantMode:
    def test_uniform_grid_compresses_below_one_percent(self):
        colors = np.tile(np.array([120, 64, 200], np.uint8), (10_000, 1))
        grid = pack_colors(voxels_with_colors(colors))
        raw_size = len(compress_colors(grid, RAW))
        quant_size = len(compress_colors(grid, QUANT))
        assert quant_size < 0.01 * raw_size

    def test_deterministic_decode(self, rng):
        colors = rng.integers(0, 256, (500, 3))
        grid = pack_colors(voxels_with_colors(colors))
        data = compress_colors(grid, QUANT)
        a = decompress_colors(data, QUANT, grid.width, grid.height, 500)
        b = decompress_colors(data, QUANT, grid.width, grid.height, 500)
        np.testing.assert_array_equal(a, b)

    def test_gradient_error_bound(self):
        # Brightness ramp with a gentle hue drift (chroma stays within a
        # few quantizer steps): per-channel error stays inside
        # ceil(256 / 2^luma_bits) + 8 = 12.
        n = 4096
        t = np.linspace(0.0, 1.0, n)
        base = 50 + 160 * t
        colors = np.stack(
            [
                base + 3 * np.sin(2 * np.pi * t),
                base,
                base - 3 * np.sin(2 * np.pi * t),
            ],
            axis=1,
        ).astype(np.uint8)
        grid = pack_colors(voxels_with_colors(colors))
        data = compress_colors(grid, QUANT)
        out = decompress_colors(data, QUANT, grid.width, grid.height, n)
        max_err = int(np.abs(out.astype(int) - colors.astype(int)).max())
        assert max_err <= 12, max_err

    def test_saturated_gradient_error_ceiling(self):
        # On a 2D-smooth full-swing gradient the chroma error is bounded
        # by half a 4-bit step (8) plus the 2x2 subsample slack (~2), so
        # blue error can reach 3 (luma) + 454*10/256 + 1 (rounding) ~= 22.
        w = h = 64
        gx, gy = np.meshgrid(np.linspace(0, 1, w), np.linspace(0, 1, h))
        pixels = np.stack(
            [40 + 170 * gx, 60 + 140 * gy, 220 - 180 * (gx + gy) / 2], axis=-1
        ).astype(np.uint8)
        grid = ColorGrid(w, h, pixels, n=w * h)
        data = compress_colors(grid, QUANT)
        out = decompress_colors(data, QUANT, w, h, w * h)
        max_err = int(np.abs(out.astype(int) - pixels.reshape(-1, 3).astype(int)).max())
        assert max_err <= 22, max_err

    def test_empty_payload(self):
        out = decompress_colors(b"", QUANT, 0, 0, 0)
        assert out.shape == (0, 3)

    def test_truncated_stream_rejected(self, rng):
        colors = rng.integers(0, 256, (100, 3))
        grid = pack_colors(voxels_with_colors(colors))
        data = compress_colors(grid, QUANT)
        with pytest.raises(BitstreamError):
            decompress_colors(data[: len(data) // 2], QUANT, grid.width, grid.height, 100)

    def test_trailing_bytes_rejected(self, rng):
        colors = rng.integers(0, 256, (100, 3))
        grid = pack_colors(voxels_with_colors(colors))
        data = compress_colors(grid, QUANT) + b"\x00\x00"
        with pytest.raises(BitstreamError):
            decompress_colors(data, QUANT, grid.width, grid.height, 100)

    def test_bad_bit_depth_header(self):
        with pytest.raises(BitstreamError):
            decompress_colors(b"\x01\x09" + b"\x00" * 20, QUANT, 8, 8, 3)


def test_color_grid_capacity_validation():
    with pytest.raises(ValueError):
        ColorGrid(8, 8, np.zeros((8, 8, 3), np.uint8), n=100)
