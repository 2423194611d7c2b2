"""Interaction log conditioning and synthetic log generation."""
from __future__ import annotations

import math

import numpy as np

from .identify import InteractionSample
from .wheel import DEFAULT_SOIL, DEFAULT_WHEEL, forward_wheel, sinkage_from_entry_angle

SIGNALS = ("F_N", "M_R", "omega", "v", "z")


def smooth_log(samples, window_s=0.5):
    """Centred moving average over a time window, applied to each measured signal.

    Labels and timestamps pass through. Windows are clipped at the ends of the
    log. ``window_s <= 0`` returns copies of the input.
    """
    samples = list(samples)
    if window_s <= 0 or len(samples) < 2:
        return [InteractionSample(**vars(s)) for s in samples]
    t = np.array([s.t for s in samples], dtype=float)
    if np.any(np.diff(t) < 0):
        raise ValueError("log timestamps must be non-decreasing")
    lo = np.searchsorted(t, t - window_s / 2, side="left")
    hi = np.searchsorted(t, t + window_s / 2, side="right")
    out = [dict(vars(s)) for s in samples]
    for name in SIGNALS:
        x = np.array([getattr(s, name) for s in samples], dtype=float)
        csum = np.concatenate([[0.0], np.cumsum(x)])
        avg = (csum[hi] - csum[lo]) / (hi - lo)
        for d, a in zip(out, avg):
            d[name] = float(a)
    return [InteractionSample(**d) for d in out]


def downsample(samples, period_s):
    """Keep the first sample of each ``period_s`` bucket."""
    kept, next_t = [], -math.inf
    for s in samples:
        if s.t >= next_t:
            kept.append(s)
            next_t = s.t + period_s
    return kept


def synthetic_log(model, class_names, n_per_class, rng, geometry=DEFAULT_WHEEL, soil=DEFAULT_SOIL,
                  N_bounds=(0.05, 2.5), phi_bounds=(0.0, 60.0), slip_range=(0.05, 0.6),
                  theta1_range=(0.1, 0.45), omega=2.0, dt=0.01):
    """Forward-simulate wheel measurements for parameters drawn from ``model``.

    Draws are clipped into the identification search box so every sample is
    recoverable; classes absent from ``model`` or with zero spread are skipped.
    """
    rows, t = [], 0.0
    for c in class_names:
        if c not in model.entries:
            continue
        gN, gp = model.entries[c]["N"], model.entries[c]["phi"]
        if gN.sigma == 0 and gN.mu == 0:
            continue
        for _ in range(n_per_class):
            N = float(np.clip(rng.normal(gN.mu, gN.sigma), *N_bounds))
            phi = float(np.clip(rng.normal(gp.mu, gp.sigma), *phi_bounds))
            s = float(rng.uniform(*slip_range))
            theta1 = float(rng.uniform(*theta1_range))
            F, M = forward_wheel(N, phi, s, theta1, geometry, soil)
            v = geometry.r_s * omega * (1.0 - s)
            rows.append(InteractionSample(t=round(t, 6), F_N=F, M_R=M, omega=omega, v=v,
                                          z=sinkage_from_entry_angle(theta1, geometry.r), label=c))
            t += dt
    return rows
