"""Per-pixel patch texture features: colour mean, colour spread, gradient energy."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

DEFAULT_RADIUS = 4
N_FEATURES = 9

# Fixed rescaling into [0, 1] for 8-bit input.
MEAN_SCALE = 255.0
STD_SCALE = 127.5                   # largest population std of values in [0, 255]
GRAD_SCALE = 255.0 * math.sqrt(2)   # one-sided differences at borders reach 255 per axis


@dataclass
class FeatureMap:
    data: np.ndarray                     # H x W x F
    config: dict = field(default_factory=dict)

    @property
    def shape(self):
        return self.data.shape

    @property
    def n_features(self):
        return self.data.shape[2]


def feature_config(patch_radius=DEFAULT_RADIUS):
    return {"patch_radius": int(patch_radius), "n_features": N_FEATURES,
            "layout": "mean_rgb,std_rgb,grad_rgb"}


def box_mean(x, radius):
    """Mean over the (2r+1)^2 window around each pixel, clipped to the image.

    Near the border the window shrinks rather than padding, so a radius that
    covers the whole image gives every pixel the global mean.
    """
    H, W = x.shape[:2]
    c = np.zeros((H + 1, W + 1) + x.shape[2:], dtype=np.float64)
    c[1:, 1:] = x.cumsum(axis=0).cumsum(axis=1)
    r0 = np.clip(np.arange(H) - radius, 0, H)
    r1 = np.clip(np.arange(H) + radius + 1, 0, H)
    c0 = np.clip(np.arange(W) - radius, 0, W)
    c1 = np.clip(np.arange(W) + radius + 1, 0, W)
    s = c[r1][:, c1] - c[r0][:, c1] - c[r1][:, c0] + c[r0][:, c0]
    area = np.outer(r1 - r0, c1 - c0).astype(np.float64)
    if x.ndim == 3:
        area = area[..., None]
    return s / area


def extract_features(image, patch_radius=DEFAULT_RADIUS) -> FeatureMap:
    img = np.asarray(image)
    if img.ndim != 3 or img.shape[2] != 3 or img.shape[0] == 0 or img.shape[1] == 0:
        raise DataError(f"expected a non-empty H x W x 3 RGB image, got shape {img.shape}")
    if patch_radius < 1:
        raise DataError(f"patch radius must be >= 1, got {patch_radius}")
    x = img.astype(np.float64)
    mean = box_mean(x, patch_radius)
    var = np.maximum(box_mean(x * x, patch_radius) - mean * mean, 0.0)
    if x.shape[0] > 1 and x.shape[1] > 1:
        gy, gx = np.gradient(x, axis=(0, 1))
        gmag = np.sqrt(gx * gx + gy * gy)
    else:
        gmag = np.zeros_like(x)
    feats = np.concatenate([mean / MEAN_SCALE, np.sqrt(var) / STD_SCALE,
                            box_mean(gmag, patch_radius) / GRAD_SCALE], axis=2)
    return FeatureMap(feats, feature_config(patch_radius))
