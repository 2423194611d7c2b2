"""Deterministic raster visualisation: heatmaps, class maps and overlays.

All colour arithmetic is integer or exactly specified float-to-index
rounding, so the same input gives byte-identical images on any platform.
"""
from __future__ import annotations

from functools import lru_cache
from importlib import resources

import numpy as np

from .. import IGNORE
from ..errors import DataError

COLORMAPS = {"ordered": "colormap_ordered.txt"}
NODATA_COLOR = (0, 0, 0)


@lru_cache(maxsize=None)
def load_colormap(colormap_id="ordered"):
    """256 x 3 uint8 lookup table shipped with the package."""
    if colormap_id not in COLORMAPS:
        raise DataError(f"unknown colormap '{colormap_id}' (available: {', '.join(COLORMAPS)})")
    text = resources.files("terrasight.io").joinpath("data", COLORMAPS[colormap_id]).read_text()
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith("#")]
    lut = np.array(rows, dtype=np.int64)
    if lut.shape != (256, 3) or lut.min() < 0 or lut.max() > 255:
        raise DataError(f"colormap '{colormap_id}' is malformed: shape {lut.shape}")
    lut = lut.astype(np.uint8)
    lut.setflags(write=False)
    return lut


def heatmap_indices(raster, value_range):
    """LUT index per pixel: floor(clip((v - lo) / (hi - lo), 0, 1) * 255 + 0.5); -1 marks NaN."""
    a = np.asarray(raster, dtype=np.float64)
    if a.ndim != 2 or a.size == 0:
        raise DataError(f"heatmap needs a non-empty 2-D raster, got shape {a.shape}")
    lo, hi = (float(v) for v in value_range)
    if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
        raise DataError(f"value range needs finite min < max, got ({lo}, {hi})")
    nan = np.isnan(a)
    frac = np.clip((np.where(nan, lo, a) - lo) / (hi - lo), 0.0, 1.0)
    idx = np.floor(frac * 255.0 + 0.5).astype(np.int64)
    idx[nan] = -1
    return idx


def render_heatmap(raster, value_range, colormap_id="ordered"):
    """H x W x 3 uint8 image; out-of-range values clamp to the LUT ends, NaN is black."""
    idx = heatmap_indices(raster, value_range)
    lut = load_colormap(colormap_id)
    img = lut[np.maximum(idx, 0)]
    img[idx < 0] = NODATA_COLOR
    return img


def render_classes(labels, colors):
    """Class-colour image; IGNORE and unknown labels are black."""
    labels = np.asarray(labels)
    if labels.ndim != 2 or labels.size == 0:
        raise DataError(f"label raster must be non-empty 2-D, got shape {labels.shape}")
    palette = np.zeros((256, 3), dtype=np.uint8)
    palette[:len(colors)] = np.asarray(colors, dtype=np.uint8)
    palette[IGNORE] = NODATA_COLOR
    return palette[labels.astype(np.uint8)]


def overlay(image, colors_img, alpha_pct=50, mask=None):
    """Integer alpha blend: (a * colour + (100 - a) * image + 50) // 100 where ``mask`` is set."""
    image = np.asarray(image)
    colors_img = np.asarray(colors_img)
    if image.shape != colors_img.shape or image.dtype != np.uint8 or colors_img.dtype != np.uint8:
        raise DataError(f"overlay needs two uint8 images of one shape, got {image.shape} and {colors_img.shape}")
    a = int(alpha_pct)
    if not 0 <= a <= 100:
        raise DataError(f"alpha percentage {alpha_pct} outside [0, 100]")
    blend = ((a * colors_img.astype(np.int32) + (100 - a) * image.astype(np.int32) + 50) // 100).astype(np.uint8)
    if mask is None:
        return blend
    return np.where(np.asarray(mask, dtype=bool)[..., None], blend, image)
