"""Full versus partial annotation trade-off."""
from __future__ import annotations

import numpy as np

from ..errors import DataError
from .classes import TerrainClassSet, class_proportions
from .classifier import TrainParams, predict_labels, train_classifier
from .features import extract_features
from .loss import compute_class_weights
from .metrics import confusion, metrics


def mixed_annotations(train, ratio, rng):
    """Label rasters where round(ratio * n) randomly chosen images keep full labels, the rest partial."""
    n = len(train)
    n_full = int(round(ratio * n))
    full = set(rng.permutation(n)[:n_full].tolist())
    return [s.labels if i in full else s.partial for i, s in enumerate(train)], n_full


def annotation_ratio_experiment(train, test, ratios, params=None, class_set=None,
                                patch_radius=4, c=1.1, miou_mode="present"):
    """Train once per ratio of fully annotated images and score on fully labelled test images.

    Returns a list of dicts with ratio, n_full, pixel accuracy, mIoU and the
    final training loss. Class weights come from each run's own label mix.
    """
    params = params or TrainParams()
    class_set = class_set or TerrainClassSet()
    for r in ratios:
        if not 0.0 <= r <= 1.0:
            raise DataError(f"annotation ratio {r} outside [0, 1]")
    if any(s.partial is None for s in train):
        raise DataError("every training sample needs a partial annotation")
    K = class_set.K
    f_train = [extract_features(s.image, patch_radius) for s in train]
    f_test = [extract_features(s.image, patch_radius) for s in test]
    pred_test = None
    rows = []
    for r in ratios:
        rng = np.random.default_rng([params.seed, int(round(r * 1e6))])
        labels, n_full = mixed_annotations(train, r, rng)
        beta = compute_class_weights(class_proportions(labels, K), c)
        clf = train_classifier(f_train, labels, beta, params, class_set)
        cm = np.zeros((K, K), dtype=np.int64)
        for f, s in zip(f_test, test):
            cm += confusion(predict_labels(clf, f), s.labels, K)
        m = metrics(cm, miou_mode)
        rows.append({"ratio": r, "n_full": n_full, "accuracy": m["pixel_accuracy"],
                     "mIoU": m["mIoU"], "train_loss": clf.final_loss})
    return rows
