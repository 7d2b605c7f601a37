#!/usr/bin/env python3
"""Benchmark the compiled codec kernels against the numpy fallback.

Runs each hot kernel on a realistic frame (the default synthetic figure,
~50K occupied voxels at depth 9) plus the full encode/decode path, and
prints a comparison table. Usage:

    python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from voxmeet.capture import (
    SceneConfig,
    back_project,
    default_camera,
    fuse,
    remove_background,
    synth_capture,
    transform_to_world,
)
from voxmeet.codec import CodecConfig, decode_frame, encode_frame, voxelize
from voxmeet.codec import _kernels_np as np_impl
from voxmeet.codec.colors import _quantize, pack_colors, rgb_to_ycbcr
from voxmeet.codec.kernels import active_backend

try:
    from voxmeet.codec import _kernels_cy as cy_impl
except ImportError:
    cy_impl = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000  # ms


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    scene = SceneConfig(seed=11, target_points=54_000)
    cam = default_camera(camera_distance=scene.camera_distance)
    depth_img, color_img = synth_capture(scene, 0, cam)
    frame = back_project(remove_background(depth_img, 1_700, 4_100), color_img, cam)
    frame = fuse([transform_to_world(frame, cam.extrinsic)], 1.5)
    cfg = CodecConfig()

    voxels, _ = voxelize(frame, (np.array(cfg.bbox_center), cfg.bbox_side), cfg.octree_depth)
    ijk = np.floor(
        (frame.points - (np.array(cfg.bbox_center) - cfg.bbox_side / 2))
        / (cfg.bbox_side / 2**cfg.octree_depth)
    ).astype(np.uint64)
    geometry = np_impl.occupancy_encode(voxels.codes, cfg.octree_depth)
    grid = pack_colors(voxels)
    y_plane, _, _ = rgb_to_ycbcr(grid.pixels)
    y_q = _quantize(y_plane, cfg.luma_bits).ravel()
    rle_stream = np_impl.rle_encode(y_q)
    dup_codes = np.sort(
        np_impl.morton_encode(ijk[:, 0], ijk[:, 1], ijk[:, 2])
    )
    dup_colors = frame.colors[np.argsort(np_impl.morton_encode(ijk[:, 0], ijk[:, 1], ijk[:, 2]))]

    workloads = [
        ("morton_encode", lambda impl: impl.morton_encode(ijk[:, 0], ijk[:, 1], ijk[:, 2])),
        ("morton_decode", lambda impl: impl.morton_decode(voxels.codes)),
        ("occupancy_encode", lambda impl: impl.occupancy_encode(voxels.codes, cfg.octree_depth)),
        ("occupancy_decode", lambda impl: impl.occupancy_decode(geometry, cfg.octree_depth)),
        ("merge_duplicates", lambda impl: impl.merge_duplicate_cells(dup_codes, dup_colors)),
        ("rle_encode", lambda impl: impl.rle_encode(y_q)),
        ("rle_decode", lambda impl: impl.rle_decode(rle_stream, 0, y_q.size)),
    ]

    print(f"frame: {len(frame)} points -> {len(voxels)} voxels at depth {cfg.octree_depth}")
    print(f"active backend for the package: {active_backend()}")
    print()
    header = f"{'kernel':<18} {'numpy ms':>9} {'compiled ms':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call in workloads:
        t_np = timeit(lambda: call(np_impl), args.repeats)
        if cy_impl is not None:
            t_cy = timeit(lambda: call(cy_impl), args.repeats)
            print(f"{name:<18} {t_np:>9.3f} {t_cy:>12.3f} {t_np / t_cy:>7.1f}x")
        else:
            print(f"{name:<18} {t_np:>9.3f} {'n/a':>12} {'':>8}")

    enc = encode_frame(frame, cfg)
    t_enc = timeit(lambda: encode_frame(frame, cfg), args.repeats)
    t_dec = timeit(lambda: decode_frame(enc), args.repeats)
    print()
    print(f"end-to-end with {active_backend()} backend: "
          f"encode {t_enc:.2f} ms, decode {t_dec:.2f} ms "
          f"({len(enc.to_bytes())} bytes, {len(enc.to_bytes()) * 8 * 15 / 1e6:.2f} Mbps at 15 fps)")
    if cy_impl is None:
        print("compiled kernels not built; run: python setup.py build_ext --inplace")


if __name__ == "__main__":
    main()
