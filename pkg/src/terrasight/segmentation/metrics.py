"""Confusion matrix, IoU, recall and pixel accuracy."""
from __future__ import annotations

import numpy as np

from .. import IGNORE
from ..errors import DataError, NoScoredPixels, ShapeMismatch


def confusion(pred, truth, K):
    """K x K counts, rows = ground truth, columns = prediction; IGNORE truth pixels are skipped."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ShapeMismatch(f"prediction {pred.shape} and truth {truth.shape} differ in shape")
    mask = truth != IGNORE
    if not mask.any():
        raise NoScoredPixels("no scored pixels: truth is IGNORE everywhere")
    t = truth[mask].astype(np.int64)
    p = pred[mask].astype(np.int64)
    if t.max() >= K or p.max() >= K or p.min() < 0:
        raise DataError(f"class index outside 0..{K - 1} in prediction or truth")
    return np.bincount(t * K + p, minlength=K * K).reshape(K, K)


def metrics(cm, mode="present"):
    """Per-class IoU and recall, mIoU and pixel accuracy.

    ``mode="present"`` averages IoU over classes that occur in truth or
    prediction; ``mode="all"`` averages over every class, absent ones scoring
    0. Undefined entries are NaN and listed under ``excluded``.
    """
    cm = np.asarray(cm, dtype=np.int64)
    if cm.ndim != 2 or cm.shape[0] != cm.shape[1]:
        raise ShapeMismatch(f"confusion matrix must be square, got {cm.shape}")
    if cm.sum() == 0:
        raise DataError("empty confusion matrix")
    if np.any(cm < 0):
        raise DataError("confusion counts must be non-negative")
    tp = np.diag(cm).astype(float)
    rows = cm.sum(axis=1).astype(float)
    cols = cm.sum(axis=0).astype(float)
    union = rows + cols - tp
    with np.errstate(invalid="ignore", divide="ignore"):
        iou = np.where(union > 0, tp / union, np.nan)
        recall = np.where(rows > 0, tp / rows, np.nan)
    present = union > 0
    if mode == "present":
        miou = float(iou[present].mean())
    elif mode == "all":
        miou = float(np.nan_to_num(iou, nan=0.0).mean())
    else:
        raise DataError(f"unknown mIoU mode '{mode}'")
    return {
        "per_class_iou": iou,
        "mIoU": miou,
        "per_class_recall": recall,
        "pixel_accuracy": float(tp.sum() / cm.sum()),
        "excluded_iou": np.flatnonzero(~present).tolist(),
        "excluded_recall": np.flatnonzero(rows == 0).tolist(),
    }
