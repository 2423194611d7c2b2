"""Dense property maps, route sampling and hazard flags."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import DataError, ShapeMismatch
from ..terramech.models import PARAMETERS, UNITS
from .mixture import PROB_ATOL, moment_planes

SOFT, SLIPPERY, UNCERTAIN = 1, 2, 4
FLAG_LEGEND = {"SOFT": SOFT, "SLIPPERY": SLIPPERY, "UNCERTAIN": UNCERTAIN}


@dataclass
class PropertyMap:
    parameter: str
    mean: np.ndarray
    std: np.ndarray

    @property
    def units(self):
        return UNITS[self.parameter]

    @property
    def shape(self):
        return self.mean.shape


def _check_block(block, atol, where):
    # block: K x n float64
    if not np.all(np.isfinite(block)) or block.min() < 0 or block.max() > 1:
        raise DataError(f"probability map {where}: values must be finite and within [0, 1]")
    worst = float(np.abs(block.sum(axis=0) - 1.0).max())
    if worst > atol:
        raise DataError(f"probability map {where}: per-pixel sums deviate from 1 by {worst:.3g}")


def check_probability_map(prob, atol=PROB_ATOL):
    if prob.ndim != 3:
        raise ShapeMismatch(f"probability map must be H x W x K, got shape {prob.shape}")
    _check_block(np.asarray(prob, dtype=np.float64).reshape(-1, prob.shape[2]).T, atol, "")


BLOCK_PIXELS = 1 << 14


def _row_chunks(H, threads):
    n = max(1, min(threads, H))
    edges = np.linspace(0, H, n + 1).astype(int)
    return [(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def infer_property_maps(prob, model, class_names, threads=1, check=True):
    """Per-pixel mixture mean and std of every dominant parameter.

    Returns ``{parameter: PropertyMap}``. Rows are split across ``threads``;
    the arithmetic is per pixel, so the split never changes a single bit.
    """
    prob = np.asarray(prob)
    if prob.ndim != 3 or prob.shape[2] != len(class_names):
        raise ShapeMismatch(f"probability map has shape {prob.shape}, model expects "
                            f"{len(class_names)} classes")
    H, W, K = prob.shape
    coef = {p: model.arrays(class_names, p) for p in PARAMETERS}
    out = {p: (np.empty((H, W)), np.empty((H, W))) for p in PARAMETERS}
    step = max(1, BLOCK_PIXELS // max(W, 1))

    def work(rows):
        for a in range(rows[0], rows[1], step):
            b = min(a + step, rows[1])
            block = np.asarray(prob[a:b], dtype=np.float64).reshape(-1, K).T.copy()
            if check:
                _check_block(block, PROB_ATOL, f"rows {a}-{b}")
            for p in PARAMETERS:
                mean, sd = moment_planes(block.__getitem__, *coef[p])
                out[p][0][a:b] = mean.reshape(b - a, W)
                out[p][1][a:b] = sd.reshape(b - a, W)

    chunks = _row_chunks(H, threads)
    if len(chunks) == 1:
        work(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            list(pool.map(work, chunks))
    return {p: PropertyMap(p, *out[p]) for p in PARAMETERS}


def _bilinear(img, rows, cols):
    H, W = img.shape
    r0 = np.clip(np.floor(rows).astype(int), 0, H - 1)
    c0 = np.clip(np.floor(cols).astype(int), 0, W - 1)
    r1 = np.minimum(r0 + 1, H - 1)
    c1 = np.minimum(c0 + 1, W - 1)
    fr = rows - r0
    fc = cols - c0
    top = img[r0, c0] * (1 - fc) + img[r0, c1] * fc
    bot = img[r1, c0] * (1 - fc) + img[r1, c1] * fc
    return top * (1 - fr) + bot * fr


def sample_map(pmap: PropertyMap, rows, cols):
    """Bilinear mean and variance at fractional pixel coordinates; std = sqrt(variance)."""
    rows = np.asarray(rows, dtype=float)
    cols = np.asarray(cols, dtype=float)
    H, W = pmap.shape
    bad = (rows < 0) | (rows > H - 1) | (cols < 0) | (cols > W - 1) | ~np.isfinite(rows) | ~np.isfinite(cols)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise DataError(f"route point {i} at (row={rows[i]}, col={cols[i]}) outside {H}x{W} raster")
    mean = _bilinear(pmap.mean, rows, cols)
    var = _bilinear(pmap.std * pmap.std, rows, cols)
    return mean, np.sqrt(np.maximum(var, 0.0))


def predict_route(maps, route):
    """Sample every parameter map along each wheel's pixel track.

    ``route`` maps wheel id -> (rows, cols). Returns wheel id ->
    {"mu_N", "sigma_N", "mu_phi", "sigma_phi"} arrays.
    """
    out = {}
    for wheel, (rows, cols) in route.items():
        res = {}
        for p in PARAMETERS:
            res[f"mu_{p}"], res[f"sigma_{p}"] = sample_map(maps[p], rows, cols)
        out[wheel] = res
    return out


def hazard_flags(maps, N_max=np.inf, phi_min=-np.inf, sigma_max=None):
    """Bitmask raster: SOFT if mean N > N_max, SLIPPERY if mean phi < phi_min,
    UNCERTAIN if any parameter's std exceeds its ``sigma_max`` entry."""
    sigma_max = sigma_max or {}
    for name, v in [("N_max", N_max), ("phi_min", phi_min), *sigma_max.items()]:
        if np.isnan(v):
            raise DataError(f"threshold {name} is NaN")
    flags = np.zeros(maps["N"].shape, dtype=np.uint8)
    flags[maps["N"].mean > N_max] |= SOFT
    flags[maps["phi"].mean < phi_min] |= SLIPPERY
    for p, limit in sigma_max.items():
        flags[maps[p].std > limit] |= UNCERTAIN
    summary = {name: int(np.count_nonzero(flags & bit)) for name, bit in FLAG_LEGEND.items()}
    summary["pixels"] = int(flags.size)
    return flags, summary
