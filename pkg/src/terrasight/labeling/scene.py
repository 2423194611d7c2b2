"""Analytic ground-plane scene for checking label propagation.

The world is the plane Z = 0 (world Z up) painted with a class pattern
that is a closed-form function of the plane coordinates. Rendering a camera
intersects each pixel ray with the plane, giving exact depth and labels, so
any camera motion has a ground-truth re-render.
"""
from __future__ import annotations

import numpy as np

from .. import IGNORE
from .geometry import CameraModel, Pose

DEFAULT_CAMERA = CameraModel(fx=300.0, fy=300.0, cx=159.5, cy=119.5, width=320, height=240)


def look_pose(position, yaw_deg=0.0, pitch_down_deg=50.0):
    """Camera-to-world pose for a camera at ``position`` looking along +X (rotated by yaw), tilted down.

    Camera axes: x right, y down, z forward.
    """
    yaw, pitch = np.radians(yaw_deg), np.radians(pitch_down_deg)
    fwd = np.array([np.cos(pitch) * np.cos(yaw), np.cos(pitch) * np.sin(yaw), -np.sin(pitch)])
    right = np.array([np.sin(yaw), -np.cos(yaw), 0.0])
    down = np.cross(fwd, right)
    return Pose(np.column_stack([right, down, fwd]), np.asarray(position, dtype=float))


def plane_classes(x, y, K=6, cell=(1.0, 0.8)):
    """Class index on the ground plane: a skewed checker of K classes."""
    i = np.floor(x / cell[0]).astype(np.int64)
    j = np.floor((y + 0.3 * x) / cell[1]).astype(np.int64)
    return ((i * 3 + j * 5) % K).astype(np.uint8)


def render_plane(cam: CameraModel, pose: Pose, K=6):
    """Exact Z-depth and labels of the ground plane; pixels whose ray misses it get depth 0, IGNORE."""
    v, u = np.mgrid[0:cam.height, 0:cam.width].astype(float)
    rays = np.stack([(u - cam.cx) / cam.fx, (v - cam.cy) / cam.fy, np.ones_like(u)], axis=-1)
    d_world = rays @ pose.rotation.T
    dz = d_world[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = -pose.translation[2] / dz
    hit = (dz < 0) & np.isfinite(t) & (t > 0)
    depth = np.where(hit, t, 0.0)
    pts = pose.translation + d_world * depth[..., None]
    labels = np.full((cam.height, cam.width), IGNORE, dtype=np.uint8)
    labels[hit] = plane_classes(pts[..., 0][hit], pts[..., 1][hit], K)
    return depth, labels


def camera_pair(shift=(0.3, 0.05, 0.0), yaw_deg=3.0, height=1.5):
    src = look_pose([0.0, 0.0, height])
    dst = look_pose(np.array([0.0, 0.0, height]) + np.asarray(shift), yaw_deg=yaw_deg)
    return src, dst
