"""Moments and density of the class-probability-weighted Gaussian mixture."""
from __future__ import annotations

import numpy as np

from ..errors import DataError, DegenerateComponent

PROB_ATOL = 1e-5


def moment_planes(planes, mus, sigmas):
    """Mean and std from per-class probability planes.

    ``planes(k)`` returns the float64 probability array of class k. The
    variance is accumulated in centred form, sum_k p_k (sigma_k^2 + (mu_k - mu)^2),
    which equals sum_k p_k (mu_k^2 + sigma_k^2) - mu^2 but cannot cancel below
    zero, and a one-hot vector returns (mu_k, sigma_k) bit for bit. Sums run
    over classes in index order with elementwise ops only, so each output
    element depends on its own pixel alone and never on array layout.
    """
    K = len(mus)
    var_k = sigmas * sigmas
    mean = planes(0) * mus[0]
    tmp = np.empty_like(mean)
    for k in range(1, K):
        mean += np.multiply(planes(k), mus[k], out=tmp)
    var = np.zeros_like(mean)
    for k in range(K):
        np.subtract(mus[k], mean, out=tmp)
        np.multiply(tmp, tmp, out=tmp)
        tmp += var_k[k]
        tmp *= planes(k)
        var += tmp
    return mean, np.sqrt(var, out=var)


def _check_vector(p, K):
    p = np.asarray(p, dtype=float)
    if p.shape != (K,):
        raise DataError(f"probability vector has length {p.size}, model has {K} classes")
    if np.any(p < 0) or abs(p.sum() - 1.0) > PROB_ATOL:
        raise DataError(f"probabilities must be non-negative and sum to 1 (sum={p.sum():.6g})")
    return p


def mixture_moments(p, mus, sigmas):
    """Mean and standard deviation of sum_i p_i Normal(mu_i, sigma_i).

    mu = sum p_i mu_i, sigma^2 = sum p_i (mu_i^2 + sigma_i^2) - mu^2.
    Zero-sigma components are fine here; they are point masses.
    """
    mus = np.asarray(mus, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    p = _check_vector(p, mus.size).reshape(1, -1)
    mean, sd = moment_planes(lambda k: p[:, k], mus, sigmas)
    return float(mean[0]), float(sd[0])


def mixture_pdf(p, mus, sigmas, x):
    """Density sum_i p_i N(x; mu_i, sigma_i); rejects zero-sigma components with weight."""
    mus = np.asarray(mus, dtype=float)
    sigmas = np.asarray(sigmas, dtype=float)
    p = _check_vector(p, mus.size)
    live = p > 0
    if np.any(sigmas[live] <= 0):
        bad = np.flatnonzero(live & (sigmas <= 0)).tolist()
        raise DegenerateComponent(
            f"components {bad} have zero spread and positive weight; a point mass has no density "
            "(use mixture_moments for its mean and variance)")
    x = np.asarray(x, dtype=float)
    z = (x[..., None] - mus[live]) / sigmas[live]
    dens = np.exp(-0.5 * z * z) / (np.sqrt(2.0 * np.pi) * sigmas[live])
    return dens @ p[live]


def sample_mixture(p, mus, sigmas, size, rng):
    """Draws from the mixture (component index by p, then Gaussian)."""
    p = np.asarray(p, dtype=float)
    idx = rng.choice(len(p), size=size, p=p / p.sum())
    return rng.normal(np.asarray(mus)[idx], np.asarray(sigmas)[idx])
