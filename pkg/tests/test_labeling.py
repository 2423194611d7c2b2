import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from terrasight import IGNORE
from terrasight.errors import DataError, ShapeMismatch
from terrasight.labeling import (DEFAULT_CAMERA, CameraModel, Pose, backproject, camera_pair, project,
                                 propagate_labels, render_plane, transform)

CAM = CameraModel(fx=500.0, fy=500.0, cx=320.0, cy=240.0, width=640, height=480)


def _random_pose(rng):
    return Pose(Rotation.random(random_state=int(rng.integers(1 << 30))).as_matrix(), rng.normal(size=3))


class TestCamera:
    def test_principal_point(self):
        np.testing.assert_allclose(backproject(320.0, 240.0, 3.0, CAM), [0, 0, 3.0])
        u, v, ok = project(np.array([0.0, 0.0, 3.0]), CAM)
        assert (u, v, ok) == (320.0, 240.0, True)

    def test_hand_value(self):
        assert backproject(420.0, 240.0, 2.0, CAM)[0] == pytest.approx(0.4, abs=1e-15)

    def test_round_trip(self, rng):
        u = rng.uniform(0, 639, 100)
        v = rng.uniform(0, 479, 100)
        pu, pv, ok = project(backproject(u, v, rng.uniform(0.5, 20, 100), CAM), CAM)
        assert ok.all() and np.abs(pu - u).max() < 1e-9 and np.abs(pv - v).max() < 1e-9

    def test_behind_camera_and_scale(self):
        assert not project(np.array([0.1, 0.1, -1.0]), CAM)[2]
        p = np.array([0.3, -0.2, 4.0])
        a, b = project(p, CAM)[:2], project(2 * p, CAM)[:2]
        assert a[0] == pytest.approx(b[0], abs=1e-12) and a[1] == pytest.approx(b[1], abs=1e-12)

    def test_backproject_needs_depth(self):
        with pytest.raises(DataError):
            backproject(1.0, 1.0, 0.0, CAM)

    def test_bad_intrinsics(self):
        with pytest.raises(DataError):
            CameraModel(0.0, 1.0, 1.0, 1.0, 4, 4)


class TestPoses:
    def test_identity(self, rng):
        pose = _random_pose(rng)
        p = rng.normal(size=(10, 3))
        np.testing.assert_allclose(transform(p, pose, pose), p, atol=1e-12)

    def test_pure_translation(self):
        t = np.array([0.5, -0.2, 1.0])
        p = np.array([[1.0, 2.0, 3.0]])
        np.testing.assert_allclose(transform(p, Pose(), Pose(np.eye(3), t)), p - t, atol=1e-15)

    def test_inverse(self, rng):
        a, b = _random_pose(rng), _random_pose(rng)
        p = rng.normal(size=(10, 3))
        np.testing.assert_allclose(transform(transform(p, a, b), b, a), p, atol=1e-9)

    def test_quaternion_order(self):
        # 90 degrees about z: scalar-first input
        pose = Pose.from_quaternion(np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4), 1, 2, 3)
        np.testing.assert_allclose(pose.rotation @ [1, 0, 0], [0, 1, 0], atol=1e-15)
        np.testing.assert_allclose(pose.translation, [1, 2, 3])

    def test_rejects_non_unit_quaternion(self):
        with pytest.raises(DataError):
            Pose.from_quaternion(1, 1, 0, 0, 0, 0, 0)

    def test_rejects_reflection(self):
        with pytest.raises(DataError):
            Pose(np.diag([1.0, 1.0, -1.0]))


class TestPropagation:
    def test_identity_reproduces_labels(self):
        pose, _ = camera_pair()
        depth, labels = render_plane(DEFAULT_CAMERA, pose)
        out, stats = propagate_labels(labels, depth, pose, pose, depth, DEFAULT_CAMERA)
        valid = (labels != IGNORE) & (depth > 0)
        assert np.array_equal(out[valid], labels[valid])
        assert stats.written == valid.sum() and stats.occluded == 0

    @pytest.mark.parametrize("shift,yaw", [((0.3, 0.05, 0.0), 3.0), ((0.5, -0.1, 0.05), -5.0)])
    def test_matches_analytic_render(self, shift, yaw):
        src, dst = camera_pair(shift, yaw)
        d_src, l_src = render_plane(DEFAULT_CAMERA, src)
        d_dst, l_dst = render_plane(DEFAULT_CAMERA, dst)
        out, stats = propagate_labels(l_src, d_src, src, dst, d_dst, DEFAULT_CAMERA)
        valid = (out != IGNORE) & (l_dst != IGNORE)
        assert valid.sum() > 0.5 * out.size
        assert (out[valid] == l_dst[valid]).mean() >= 0.99

    def test_occlusion(self):
        cam = CameraModel(10.0, 10.0, 2.0, 2.0, 5, 5)
        labels = np.full((5, 5), IGNORE, np.uint8)
        labels[2, 2] = 3
        depth = np.full((5, 5), 2.0)
        dst_depth = depth.copy()
        dst_depth[2, 2] = 1.9
        out, stats = propagate_labels(labels, depth, Pose(), Pose(), dst_depth, cam)
        assert out[2, 2] == IGNORE and stats.occluded == 1 and stats.written == 0

    def test_nearest_wins(self):
        # dst camera shifted 0.2 m along x: source pixel (2,2) at 2 m and (2,3) at 1 m
        # both land on destination column 1; the nearer one must win
        cam = CameraModel(10.0, 10.0, 2.0, 2.0, 5, 5)
        labels = np.full((5, 5), IGNORE, np.uint8)
        labels[2, 2], labels[2, 3] = 1, 2
        depth = np.full((5, 5), 2.0)
        depth[2, 3] = 1.0
        dst = Pose(np.eye(3), np.array([0.2, 0.0, 0.0]))
        out, stats = propagate_labels(labels, depth, Pose(), dst, np.full((5, 5), 1.5), cam, z_tol=1.0)
        assert stats.propagated == 2 and stats.written == 1
        assert out[2, 1] == 2

    def test_shape_and_class_checks(self):
        cam = CameraModel(10.0, 10.0, 2.0, 2.0, 5, 5)
        with pytest.raises(ShapeMismatch):
            propagate_labels(np.zeros((4, 5), np.uint8), np.ones((5, 5)), Pose(), Pose(), np.ones((5, 5)), cam)
        with pytest.raises(DataError):
            propagate_labels(np.full((5, 5), 9, np.uint8), np.ones((5, 5)), Pose(), Pose(), np.ones((5, 5)),
                             cam, K=6)
