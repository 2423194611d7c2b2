"""Route-level accuracy against in-situ identified ground truth."""
import numpy as np

from ..errors import DataError

FULL_SCALE = {"N": 2.0, "phi": 60.0}


def _series(*arrays):
    arrays = [np.asarray(a, dtype=float).ravel() for a in arrays]
    n = arrays[0].size
    if n == 0:
        raise DataError("empty series")
    if any(a.size != n for a in arrays):
        raise DataError(f"series lengths differ: {[a.size for a in arrays]}")
    return arrays


def full_scale_error(pred, truth, fs_range):
    """Mean absolute error as a percentage of the parameter's full range."""
    if not fs_range > 0:
        raise DataError(f"full-scale range must be positive, got {fs_range}")
    pred, truth = _series(pred, truth)
    return float(np.mean(np.abs(pred - truth)) / fs_range * 100.0)


def interval_coverage(mean, std, truth, multiplier=1.0):
    """Fraction of points with |truth - mean| <= multiplier * std."""
    if not multiplier > 0:
        raise DataError(f"interval multiplier must be positive, got {multiplier}")
    mean, std, truth = _series(mean, std, truth)
    return float(np.mean(np.abs(truth - mean) <= multiplier * std))
