"""Pinhole camera, rigid poses and depth-based label propagation between frames."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.transform import Rotation

from .. import IGNORE
from ..errors import DataError, ShapeMismatch

Z_EPS = 1e-6


@dataclass(frozen=True)
class CameraModel:
    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise DataError(f"focal lengths must be positive: fx={self.fx}, fy={self.fy}")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise DataError(f"principal point ({self.cx}, {self.cy}) outside {self.width}x{self.height}")

    def to_dict(self):
        return dict(fx=self.fx, fy=self.fy, cx=self.cx, cy=self.cy, width=self.width, height=self.height)

    @classmethod
    def from_dict(cls, d):
        try:
            return cls(float(d["fx"]), float(d["fy"]), float(d["cx"]), float(d["cy"]),
                       int(d["width"]), int(d["height"]))
        except KeyError as exc:
            raise DataError(f"camera intrinsics lack field {exc}") from None


@dataclass(frozen=True)
class Pose:
    """Camera-to-world rigid transform: x_world = R @ x_cam + t."""
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.asarray(self.rotation, dtype=float)
        t = np.asarray(self.translation, dtype=float).reshape(-1)
        if R.shape != (3, 3) or t.shape != (3,):
            raise DataError("pose needs a 3x3 rotation and a 3-vector translation")
        if not np.allclose(R.T @ R, np.eye(3), atol=1e-9) or np.linalg.det(R) <= 0:
            raise DataError("pose rotation is not a proper orthonormal matrix")
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def from_quaternion(cls, qw, qx, qy, qz, tx, ty, tz):
        q = np.array([qx, qy, qz, qw], dtype=float)
        norm = np.linalg.norm(q)
        if abs(norm - 1.0) > 1e-6:
            raise DataError(f"pose quaternion is not unit length (|q|={norm:.9g})")
        return cls(Rotation.from_quat(q / norm).as_matrix(), np.array([tx, ty, tz], dtype=float))

    def inverse(self):
        Rt = self.rotation.T
        return Pose(Rt, -Rt @ self.translation)


def backproject(u, v, depth, cam: CameraModel):
    """Pixel (column u, row v) at Z-depth ``depth`` to a camera-frame point."""
    u, v, d = (np.asarray(a, dtype=float) for a in (u, v, depth))
    if np.any(~(d > 0)) or np.any(~np.isfinite(d)):
        raise DataError("backprojection needs positive finite depth")
    if np.any((u < 0) | (u > cam.width - 1) | (v < 0) | (v > cam.height - 1)):
        raise DataError("pixel outside the image")
    return np.stack([(u - cam.cx) / cam.fx * d, (v - cam.cy) / cam.fy * d, d], axis=-1)


def transform(points, pose_src: Pose, pose_dst: Pose):
    """Source-camera points into the destination camera frame (dst^-1 composed with src)."""
    p = np.asarray(points, dtype=float)
    world = p @ pose_src.rotation.T + pose_src.translation
    return (world - pose_dst.translation) @ pose_dst.rotation


def project(points, cam: CameraModel, eps=Z_EPS):
    """Camera-frame points to pixel (u, v) plus a flag: in front of the camera and inside the image."""
    p = np.asarray(points, dtype=float)
    X, Y, Z = p[..., 0], p[..., 1], p[..., 2]
    front = Z > eps
    Zs = np.where(front, Z, 1.0)
    u = cam.fx * X / Zs + cam.cx
    v = cam.fy * Y / Zs + cam.cy
    ok = front & (u >= -0.5) & (u < cam.width - 0.5) & (v >= -0.5) & (v < cam.height - 0.5)
    return u, v, ok


@dataclass
class PropagationStats:
    propagated: int = 0      # source pixels whose label landed on a consistent destination surface
    occluded: int = 0        # projected depth disagrees with destination depth by more than z_tol
    out_of_view: int = 0
    invalid_depth: int = 0   # source or destination depth missing
    written: int = 0         # destination pixels that received a label

    def as_dict(self):
        return dict(vars(self))


def propagate_labels(src_labels, src_depth, src_pose, dst_pose, dst_depth, cam, z_tol=0.03, K=None):
    """Carry labelled source pixels into the destination frame through depth.

    Forward splatting: each labelled source pixel with valid depth is
    back-projected, moved into the destination camera and rounded to the
    nearest pixel. It is written only where the destination depth agrees
    within ``z_tol``; among several candidates the nearest wins, ties going
    to the smaller source pixel index. Unwritten pixels are IGNORE.
    """
    src_labels = np.asarray(src_labels)
    src_depth = np.asarray(src_depth, dtype=float)
    dst_depth = np.asarray(dst_depth, dtype=float)
    shape = (cam.height, cam.width)
    for name, a in (("source labels", src_labels), ("source depth", src_depth), ("destination depth", dst_depth)):
        if a.shape != shape:
            raise ShapeMismatch(f"{name} has shape {a.shape}, camera is {shape}")
    if K is not None:
        bad = (src_labels != IGNORE) & (src_labels >= K)
        if bad.any():
            raise DataError(f"source label {int(src_labels[bad][0])} is not below K={K}")

    stats = PropagationStats()
    out = np.full(shape, IGNORE, dtype=np.uint8)
    labelled = src_labels != IGNORE
    valid = labelled & (src_depth > 0) & np.isfinite(src_depth)
    stats.invalid_depth += int((labelled & ~valid).sum())
    idx = np.flatnonzero(valid)
    if idx.size == 0:
        return out, stats

    v, u = np.divmod(idx, cam.width)
    pts = backproject(u, v, src_depth.ravel()[idx], cam)
    q = transform(pts, src_pose, dst_pose)
    pu, pv, ok = project(q, cam)
    stats.out_of_view += int((~ok).sum())
    idx, q, pu, pv = idx[ok], q[ok], pu[ok], pv[ok]
    cu = np.floor(pu + 0.5).astype(np.intp)
    cv = np.floor(pv + 0.5).astype(np.intp)
    target = cv * cam.width + cu
    z = q[:, 2]
    d_dst = dst_depth.ravel()[target]
    no_depth = ~(d_dst > 0)
    stats.invalid_depth += int(no_depth.sum())
    agree = ~no_depth & (np.abs(z - d_dst) <= z_tol)
    stats.occluded += int((~no_depth & ~agree).sum())
    idx, target, z = idx[agree], target[agree], z[agree]
    stats.propagated = int(idx.size)
    if idx.size:
        order = np.lexsort((idx, z, target))
        target, idx = target[order], idx[order]
        first = np.ones(target.size, dtype=bool)
        first[1:] = target[1:] != target[:-1]
        out.ravel()[target[first]] = src_labels.ravel()[idx[first]]
        stats.written = int(first.sum())
    return out, stats
