"""Deterministic synthetic RGB-D source.

Renders a moving figure proxy (head sphere, torso ellipsoid, two arm
capsules) by analytic ray casting. The output is a pure function of
(scene.seed, t_us, camera), so captures are reproducible byte for byte.

The proxy is sized so that, under the default camera, the foreground
pixel count tracks scene.target_points and back-projected points land
roughly one per voxel at the codec's default grid. It is an operating
point stand-in, not an anthropometric model.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from voxmeet.capture.types import CameraModel, ColorImage, DepthImage, SceneConfig

# Base proxy dimensions (meters) at target_points = 50_000; the whole
# figure scales with sqrt(target_points / 50_000). _CAL trims the base
# size so the rendered foreground pixel count sits on the target.
_BASE_TARGET = 50_000.0
_CAL = 0.970
_TORSO_SEMI = (0.55, 0.72, 0.28)
_HEAD_RADIUS = 0.26
_HEAD_CENTER_Y = 0.98
_SHOULDER = (0.60, 0.40)  # |x|, y in body coordinates
_HAND_REST = (0.88, -0.34)
_ARM_RADIUS = 0.085

_SHIRT_PALETTE = (
    (70, 110, 180),
    (180, 80, 70),
    (70, 150, 90),
    (160, 125, 60),
    (120, 80, 150),
    (90, 90, 95),
)
_SKIN = np.array([205.0, 170.0, 140.0])

_LIGHT = np.array([-0.35, -0.45, -0.82])
_LIGHT_DIR = _LIGHT / np.linalg.norm(_LIGHT)


def default_camera(
    width: int = 640, height: int = 640, camera_distance: float = 2.9
) -> CameraModel:
    """Camera facing the figure from `camera_distance` meters.

    The extrinsic places it at world (0, 1, d) looking toward -z with
    image y mapping to world -y, so back-projected points come out in a
    y-up world centered on the subject. Focal length is fixed: smaller
    resolutions crop the view rather than widen it, which keeps the
    pixel footprint (and thus points-per-voxel) constant.
    """
    extrinsic = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, -1.0, 0.0, 1.0],
            [0.0, 0.0, -1.0, camera_distance],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )
    return CameraModel(
        fx=495.0,
        fy=495.0,
        cx=width / 2.0,
        cy=height / 2.0,
        width=width,
        height=height,
        extrinsic=extrinsic,
    )


@lru_cache(maxsize=8)
def _ray_grid(fx: float, fy: float, cx: float, cy: float, width: int, height: int):
    u = np.arange(width, dtype=np.float32)
    v = np.arange(height, dtype=np.float32)
    dx = np.broadcast_to((u - np.float32(cx)) / np.float32(fx), (height, width)).copy()
    dy = np.broadcast_to(
        ((v - np.float32(cy)) / np.float32(fy))[:, None], (height, width)
    ).copy()
    dx.flags.writeable = False
    dy.flags.writeable = False
    return dx, dy


def _subrect(cam: CameraModel, center, radius: float):
    """Conservative pixel rectangle covering a bounding sphere's projection."""
    z_near = center[2] - radius
    if z_near <= 0.05:
        return 0, cam.width, 0, cam.height
    half_u = cam.fx * radius / z_near
    half_v = cam.fy * radius / z_near
    u_c = cam.cx + cam.fx * center[0] / center[2]
    v_c = cam.cy + cam.fy * center[1] / center[2]
    u0 = max(0, int(np.floor(u_c - half_u - 2)))
    u1 = min(cam.width, int(np.ceil(u_c + half_u + 3)))
    v0 = max(0, int(np.floor(v_c - half_v - 2)))
    v1 = min(cam.height, int(np.ceil(v_c + half_v + 3)))
    return u0, max(u0, u1), v0, max(v0, v1)


def _ellipsoid_t(dx, dy, center, semi):
    """Nearest positive ray parameter t for rays t*(dx,dy,1) vs an ellipsoid."""
    ax, ay, az = (np.float32(v) for v in semi)
    sx, sy, sz = dx / ax, dy / ay, np.float32(1.0 / semi[2])
    cxn = np.float32(center[0] / semi[0])
    cyn = np.float32(center[1] / semi[1])
    czn = np.float32(center[2] / semi[2])
    a = sx * sx + sy * sy + sz * sz
    b = np.float32(-2.0) * (sx * cxn + sy * cyn + sz * czn)
    c = np.float32(cxn * cxn + cyn * cyn + czn * czn - 1.0)
    disc = b * b - np.float32(4.0) * a * c
    hit = disc >= 0
    root = np.sqrt(np.where(hit, disc, 0))
    t_near = (-b - root) / (np.float32(2.0) * a)
    return np.where(hit & (t_near > 0), t_near, np.float32(np.inf))


def _sphere_t(dx, dy, center, radius):
    return _ellipsoid_t(dx, dy, center, (radius, radius, radius))


def _capsule_t(dx, dy, a_pt, b_pt, radius):
    """Nearest hit against a capsule (cylinder body plus end spheres)."""
    axis = b_pt - a_pt
    length = np.linalg.norm(axis)
    u = (axis / length).astype(np.float32)
    a32 = a_pt.astype(np.float32)
    r2 = np.float32(radius * radius)

    d_dot_u = dx * u[0] + dy * u[1] + u[2]
    mx, my, mz = dx - d_dot_u * u[0], dy - d_dot_u * u[1], np.float32(1.0) - d_dot_u * u[2]
    oa_dot_u = np.float32(-(a_pt @ (axis / length)))
    qx = -a32[0] - oa_dot_u * u[0]
    qy = -a32[1] - oa_dot_u * u[1]
    qz = -a32[2] - oa_dot_u * u[2]

    a = mx * mx + my * my + mz * mz
    b = np.float32(2.0) * (mx * qx + my * qy + mz * qz)
    c = qx * qx + qy * qy + qz * qz - r2
    disc = b * b - np.float32(4.0) * a * c
    ok = (disc >= 0) & (a > 1e-12)
    root = np.sqrt(np.where(ok, disc, 0))
    # -1 marks misses (keeps the axial product finite, unlike inf)
    t_raw = np.where(ok, (-b - root) / np.where(a > 1e-12, np.float32(2.0) * a, 1), -1.0)
    # Keep only hits whose axial coordinate falls inside the segment.
    s_axial = t_raw * d_dot_u + oa_dot_u
    t_cyl = np.where(
        (t_raw > 0) & (s_axial >= 0) & (s_axial <= np.float32(length)), t_raw, np.inf
    ).astype(np.float32)

    t = np.minimum(t_cyl, _sphere_t(dx, dy, a_pt, radius))
    return np.minimum(t, _sphere_t(dx, dy, b_pt, radius))


def _pose(scene: SceneConfig, t_us: int):
    """Primitive centers/endpoints in camera coordinates at time t."""
    rng = np.random.default_rng(scene.seed)
    phases = rng.uniform(0.0, 2.0 * np.pi, size=4)
    shirt = np.array(_SHIRT_PALETTE[rng.integers(len(_SHIRT_PALETTE))], dtype=np.float64)
    shirt = np.clip(shirt + rng.uniform(-18, 18, size=3), 0, 255)
    skin = np.clip(_SKIN + rng.uniform(-15, 15, size=3), 0, 255)

    s = _CAL * float(np.sqrt(scene.target_points / _BASE_TARGET))
    amp = scene.motion_amplitude
    t = t_us / 1e6
    sway = 0.12 * amp * np.sin(2.0 * np.pi * 0.25 * t + phases[0])
    bob = 0.06 * amp * np.sin(2.0 * np.pi * 0.50 * t + phases[1])

    d = scene.camera_distance

    def cam(xb, yb, zb):
        # body frame (y up, z toward camera) -> camera frame (y down, z forward)
        return np.array([xb + sway, -(yb + bob), d - zb])

    arms = []
    for side, ph in ((-1.0, phases[2]), (1.0, phases[3])):
        swing_y = amp * np.sin(2.0 * np.pi * 0.40 * t + ph)
        swing_z = 0.5 * amp * np.cos(2.0 * np.pi * 0.30 * t + ph)
        shoulder = cam(side * s * _SHOULDER[0], s * _SHOULDER[1], 0.0)
        hand = cam(side * s * _HAND_REST[0], s * _HAND_REST[1] + swing_y, 0.1 + swing_z)
        arms.append((shoulder, hand))
    return {
        "scale": s,
        "torso": (cam(0.0, 0.0, 0.0), tuple(s * a for a in _TORSO_SEMI)),
        "head": (cam(0.0, s * _HEAD_CENTER_Y, 0.0), s * _HEAD_RADIUS),
        "arms": arms,
        "arm_radius": s * _ARM_RADIUS,
        "shirt": shirt,
        "skin": skin,
    }


def synth_capture(scene: SceneConfig, t_us: int, cam: CameraModel):
    """Render one RGB-D frame of the scene at time t_us.

    Returns (DepthImage, ColorImage). Depth is the camera-z coordinate in
    millimeters (0 = background), matching the back_project convention.
    """
    dx, dy = _ray_grid(cam.fx, cam.fy, cam.cx, cam.cy, cam.width, cam.height)
    pose = _pose(scene, t_us)

    torso_c, torso_semi = pose["torso"]
    head_c, head_r = pose["head"]
    (l_sh, l_hand), (r_sh, r_hand) = pose["arms"]
    arm_r = pose["arm_radius"]

    def arm_bound(sh, hand):
        mid = (sh + hand) / 2.0
        return mid, np.linalg.norm(hand - sh) / 2.0 + arm_r

    prims = [
        (torso_c, max(torso_semi), lambda v0, v1, u0, u1: _ellipsoid_t(
            dx[v0:v1, u0:u1], dy[v0:v1, u0:u1], torso_c, torso_semi)),
        (head_c, head_r, lambda v0, v1, u0, u1: _sphere_t(
            dx[v0:v1, u0:u1], dy[v0:v1, u0:u1], head_c, head_r)),
        (*arm_bound(l_sh, l_hand), lambda v0, v1, u0, u1: _capsule_t(
            dx[v0:v1, u0:u1], dy[v0:v1, u0:u1], l_sh, l_hand, arm_r)),
        (*arm_bound(r_sh, r_hand), lambda v0, v1, u0, u1: _capsule_t(
            dx[v0:v1, u0:u1], dy[v0:v1, u0:u1], r_sh, r_hand, arm_r)),
    ]

    t_best = np.full((cam.height, cam.width), np.inf, dtype=np.float32)
    prim_id = np.zeros((cam.height, cam.width), dtype=np.uint8)
    for idx, (center, radius, hit_fn) in enumerate(prims):
        u0, u1, v0, v1 = _subrect(cam, center, radius)
        if u0 >= u1 or v0 >= v1:
            continue
        t_sub = hit_fn(v0, v1, u0, u1)
        view = t_best[v0:v1, u0:u1]
        closer = t_sub < view
        view[closer] = t_sub[closer]
        prim_id[v0:v1, u0:u1][closer] = idx

    fg = np.isfinite(t_best)
    depth_mm = np.zeros(t_best.shape, dtype=np.uint16)
    zf = t_best[fg].astype(np.float64)  # rays have unit z, so t is z-depth
    depth_mm[fg] = np.clip(np.round(zf * 1000.0), 1, 65535).astype(np.uint16)

    # Shading runs only on foreground pixels.
    pxf = zf * dx[fg].astype(np.float64)
    pyf = zf * dy[fg].astype(np.float64)
    pf = prim_id[fg]

    nx = np.empty_like(pxf)
    ny = np.empty_like(pxf)
    nz = np.empty_like(pxf)

    def capsule_normal(mask, a_pt, b_pt):
        axis = b_pt - a_pt
        length = np.linalg.norm(axis)
        u = axis / length
        sx, sy, sz = pxf[mask], pyf[mask], zf[mask]
        s_ax = np.clip(
            (sx - a_pt[0]) * u[0] + (sy - a_pt[1]) * u[1] + (sz - a_pt[2]) * u[2],
            0.0,
            length,
        )
        nx[mask] = sx - (a_pt[0] + s_ax * u[0])
        ny[mask] = sy - (a_pt[1] + s_ax * u[1])
        nz[mask] = sz - (a_pt[2] + s_ax * u[2])

    m = pf == 0
    nx[m] = (pxf[m] - torso_c[0]) / torso_semi[0] ** 2
    ny[m] = (pyf[m] - torso_c[1]) / torso_semi[1] ** 2
    nz[m] = (zf[m] - torso_c[2]) / torso_semi[2] ** 2
    m = pf == 1
    nx[m], ny[m], nz[m] = pxf[m] - head_c[0], pyf[m] - head_c[1], zf[m] - head_c[2]
    capsule_normal(pf == 2, l_sh, l_hand)
    capsule_normal(pf == 3, r_sh, r_hand)

    norm = np.sqrt(nx * nx + ny * ny + nz * nz)
    norm[norm == 0] = 1.0
    lambert = np.clip(
        -(nx * _LIGHT_DIR[0] + ny * _LIGHT_DIR[1] + nz * _LIGHT_DIR[2]) / norm, 0.0, 1.0
    )
    shade = 0.55 + 0.45 * lambert

    # Shirt gets a woven texture; head and arms stay smooth skin. The
    # texture keeps the color plane from being trivially compressible.
    s = pose["scale"]
    tex = 1.0 + 0.09 * np.sin(34.0 / s * (pyf - torso_c[1])) * np.sin(
        29.0 / s * (pxf - torso_c[0])
    ) + 0.035 * np.sin(113.0 / s * pxf + 87.0 / s * pyf)
    torso_mask = pf == 0
    base = np.where(torso_mask[:, None], pose["shirt"], pose["skin"])
    rgb = base * (shade * np.where(torso_mask, tex, 1.0))[:, None]

    color = np.zeros((cam.height, cam.width, 3), dtype=np.uint8)
    color[fg] = np.clip(np.round(rgb), 0, 255).astype(np.uint8)
    return (
        DepthImage(cam.width, cam.height, depth_mm),
        ColorImage(cam.width, cam.height, color),
    )
