"""Class-balanced softmax cross-entropy."""
from __future__ import annotations

import math

import numpy as np

from .. import IGNORE
from ..errors import DataError, ShapeMismatch
from .classes import check_labels

PROB_FLOOR = 1e-12


def compute_class_weights(proportions, c=1.1):
    """beta_k proportional to 1 / ln(p_k + c), normalised to sum to one.

    With c > 1 rarer classes get larger weights. Raises when any
    ln(p_k + c) <= 0, where the weight is undefined.
    """
    p = np.asarray(proportions, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DataError("proportions must be a vector with at least two classes")
    if np.any(~np.isfinite(p)) or np.any(p < 0) or np.any(p > 1):
        raise DataError(f"proportions must lie in [0, 1]: {p}")
    if abs(p.sum() - 1.0) > 1e-6:
        raise DataError(f"proportions must sum to 1, got {p.sum():.8g}")
    if not c > 0:
        raise DataError(f"weighting constant c must be positive, got {c}")
    logs = np.log(p + c)
    if np.any(logs <= 0):
        raise DataError(f"ln(p + c) <= 0 for classes {np.flatnonzero(logs <= 0).tolist()}: "
                        f"choose c > 1 - min(p) = {1 - p.min():.6g}")
    inv = 1.0 / logs
    return inv / inv.sum()


def log_softmax(logits):
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise DataError("logits must be finite")
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def softmax_probabilities(logits):
    logits = np.asarray(logits, dtype=float)
    if not np.all(np.isfinite(logits)):
        raise DataError("logits must be finite")
    e = np.exp(logits - logits.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def _scored(logits, labels, weights):
    logits = np.asarray(logits, dtype=float)
    weights = np.asarray(weights, dtype=float)
    K = logits.shape[-1]
    if weights.shape != (K,):
        raise ShapeMismatch(f"{weights.size} class weights for {K} logit channels")
    if logits.shape[:-1] != np.shape(labels):
        raise ShapeMismatch(f"logits {logits.shape[:-1]} and labels {np.shape(labels)} differ in shape")
    labels = check_labels(labels, K)
    mask = labels != IGNORE
    return logits[mask], labels[mask].astype(np.intp), weights


def weighted_cross_entropy(logits, labels, weights):
    """-(1/|scored|) sum over scored pixels of beta_true * ln p_true; IGNORE pixels excluded."""
    z, y, beta = _scored(logits, labels, weights)
    logp = log_softmax(z)[np.arange(y.size), y]
    logp = np.maximum(logp, math.log(PROB_FLOOR))
    return float(-(beta[y] * logp).sum() / y.size)


def wce_gradient(logits, labels, weights):
    """d loss / d logits: beta_true (p - onehot) / |scored| at scored pixels, zero elsewhere."""
    logits = np.asarray(logits, dtype=float)
    z, y, beta = _scored(logits, labels, weights)
    g = softmax_probabilities(z)
    g[np.arange(y.size), y] -= 1.0
    g *= (beta[y] / y.size)[:, None]
    out = np.zeros_like(logits)
    out[np.asarray(labels) != IGNORE] = g
    return out
