"""Procedural terrain-texture corpus with full and partial annotations.

Each image is a Voronoi tiling of ``n_cells`` random sites; every cell draws a
class uniformly and is filled with that class's texture:

=============  ==================  =============================================
class          base RGB            texture
=============  ==================  =============================================
soil           (176, 128, 84)      fine smooth noise (sigma 2 px, amp 6)
stony soil     (160, 118, 80)      soil-like noise plus ~5% bright pebbles (r 1-2 px)
gravel         (135, 130, 125)     strong white noise (amp 30) over smooth (amp 10)
bedrock        (205, 190, 165)     broad shading (sigma 8 px, amp 14)
rock           (85, 72, 64)        blotchy noise (sigma 2.5 px, amp 18)
background     (120, 150, 200)     near-flat (amp 2)
=============  ==================  =============================================

Partial labels keep random ellipses of the full label, minus a band of
``margin`` px around class boundaries; everything else is IGNORE.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .. import IGNORE
from .classes import TerrainClassSet

TEXTURES = {
    "soil": dict(base=(176, 128, 84), smooth=(2.0, 6.0), white=3.0),
    "stony soil": dict(base=(160, 118, 80), smooth=(2.0, 6.0), white=3.0, pebbles=0.05),
    "gravel": dict(base=(135, 130, 125), smooth=(1.0, 10.0), white=30.0),
    "bedrock": dict(base=(205, 190, 165), smooth=(8.0, 14.0), white=2.0),
    "rock": dict(base=(85, 72, 64), smooth=(2.5, 18.0), white=5.0),
    "background": dict(base=(120, 150, 200), smooth=(4.0, 2.0), white=2.0),
}


@dataclass
class CorpusSample:
    image: np.ndarray      # H x W x 3 uint8
    labels: np.ndarray     # H x W uint8, full annotation
    partial: np.ndarray    # H x W uint8, random partial annotation (IGNORE elsewhere)


def _smooth_noise(rng, shape, sigma):
    n = ndimage.gaussian_filter(rng.standard_normal(shape), sigma, mode="wrap")
    return n / max(n.std(), 1e-12)


def _texture(rng, spec, shape):
    H, W = shape
    lum = spec["smooth"][1] * _smooth_noise(rng, shape, spec["smooth"][0])
    img = np.array(spec["base"], dtype=float) + lum[..., None]
    img += spec["white"] * rng.standard_normal((H, W, 1))
    img += 0.3 * spec["white"] * rng.standard_normal((H, W, 3))
    if spec.get("pebbles"):
        seeds = rng.random(shape) < spec["pebbles"] / 5.0
        stones = ndimage.binary_dilation(seeds, iterations=1)
        img[stones] = np.array((215, 205, 190)) + 8 * rng.standard_normal((int(stones.sum()), 1))
    return img


def _tiling(rng, size, n_cells, K):
    H = W = size
    sites = rng.uniform(0, size, (n_cells, 2))
    rr, cc = np.mgrid[0:H, 0:W]
    d = (rr[..., None] - sites[:, 0]) ** 2 + (cc[..., None] - sites[:, 1]) ** 2
    cell = d.argmin(axis=2)
    cls = rng.integers(0, K, n_cells)
    return cls[cell].astype(np.uint8)


def partial_labels(rng, labels, n_blobs=(3, 7), margin=5):
    H, W = labels.shape
    interior = (ndimage.minimum_filter(labels, size=2 * margin + 1, mode="nearest")
                == ndimage.maximum_filter(labels, size=2 * margin + 1, mode="nearest"))
    rr, cc = np.mgrid[0:H, 0:W]
    keep = np.zeros((H, W), dtype=bool)
    for _ in range(int(rng.integers(*n_blobs))):
        r0, c0 = rng.uniform(0, H), rng.uniform(0, W)
        a, b = rng.uniform(0.08, 0.25) * H, rng.uniform(0.08, 0.25) * W
        ang = rng.uniform(0, np.pi)
        dr, dc = rr - r0, cc - c0
        u = dr * np.cos(ang) + dc * np.sin(ang)
        v = -dr * np.sin(ang) + dc * np.cos(ang)
        keep |= (u / a) ** 2 + (v / b) ** 2 <= 1.0
    out = np.full_like(labels, IGNORE)
    m = keep & interior
    out[m] = labels[m]
    return out


def generate_sample(rng, class_set=None, size=128, n_cells=(4, 8)):
    class_set = class_set or TerrainClassSet()
    labels = _tiling(rng, size, int(rng.integers(n_cells[0], n_cells[1] + 1)), class_set.K)
    img = np.zeros((size, size, 3))
    for k, name in enumerate(class_set.names):
        m = labels == k
        if m.any():
            img[m] = _texture(rng, TEXTURES[name], (size, size))[m]
    image = np.clip(np.rint(img), 0, 255).astype(np.uint8)
    return CorpusSample(image, labels, partial_labels(rng, labels))


def generate_corpus(n, seed=0, class_set=None, size=128):
    rng = np.random.default_rng(seed)
    return [generate_sample(rng, class_set, size) for _ in range(n)]


def train_test_corpus(n_train=20, n_test=10, seed=0, class_set=None, size=128):
    """Independent train and test draws from one seed."""
    train_seed, test_seed = np.random.SeedSequence(seed).spawn(2)
    return (generate_corpus(n_train, np.random.default_rng(train_seed), class_set, size),
            generate_corpus(n_test, np.random.default_rng(test_seed), class_set, size))
