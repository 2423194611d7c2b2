"""Semi-automatic label propagation through depth and camera poses."""
from .geometry import (CameraModel, Pose, PropagationStats, backproject, project, propagate_labels,
                       transform)
from .scene import DEFAULT_CAMERA, camera_pair, look_pose, plane_classes, render_plane
