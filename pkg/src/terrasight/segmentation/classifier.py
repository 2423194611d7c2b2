"""Multinomial logistic regression over patch features, trained on the weighted cross-entropy."""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .. import IGNORE
from ..errors import DataError, ShapeMismatch, TrainingDiverged
from .classes import TerrainClassSet, check_labels
from .features import FeatureMap
from .loss import PROB_FLOOR, softmax_probabilities

log = logging.getLogger(__name__)


@dataclass
class TrainParams:
    """Full-batch gradient descent schedule.

    ``lr`` is a fraction of 1/L, where L bounds the curvature of the loss in
    whitened feature coordinates; any lr <= 1 therefore never increases
    the training loss. The step shrinks by ``decay`` every ``decay_every``
    epochs. ``max_pixels`` caps the scored pixels used per epoch (a fixed,
    seeded subset) to bound run time.
    """
    lr: float = 1.0
    decay: float = 0.96
    decay_every: int = 50
    epochs: int = 400
    seed: int = 0
    max_pixels: int = 60000


@dataclass
class PixelClassifier:
    weights: np.ndarray                      # K x (F + 1); last column is the bias
    feature_config: dict
    class_set: TerrainClassSet = field(default_factory=TerrainClassSet)
    loss_history: list = field(default_factory=list)

    @property
    def final_loss(self):
        return self.loss_history[-1] if self.loss_history else None

    def to_dict(self):
        return {"weights": self.weights.tolist(), "feature_config": self.feature_config,
                **self.class_set.to_dict(),
                "final_loss": self.final_loss, "epochs_run": max(len(self.loss_history) - 1, 0)}

    @classmethod
    def from_dict(cls, d):
        try:
            w = np.asarray(d["weights"], dtype=float)
            cfg = d["feature_config"]
            classes = TerrainClassSet.from_dict(d)
        except KeyError as exc:
            raise DataError(f"classifier document lacks field {exc}") from None
        if w.ndim != 2 or w.shape[0] != classes.K or w.shape[1] != cfg["n_features"] + 1:
            raise DataError(f"classifier weights have shape {w.shape}, expected "
                            f"({classes.K}, {cfg['n_features'] + 1})")
        if not np.all(np.isfinite(w)):
            raise DataError("classifier weights must be finite")
        hist = [d["final_loss"]] if d.get("final_loss") is not None else []
        return cls(w, cfg, classes, hist)


def _stack_scored(features, labels, K):
    if isinstance(features, FeatureMap):
        features, labels = [features], [labels]
    if len(features) != len(labels):
        raise DataError(f"{len(features)} feature maps but {len(labels)} label images")
    xs, ys = [], []
    config = None
    for fm, lab in zip(features, labels):
        if config is None:
            config = fm.config
        elif fm.config != config:
            raise DataError("feature maps were extracted with different settings")
        lab = check_labels(lab, K, require_scored=False)
        if fm.data.shape[:2] != lab.shape:
            raise ShapeMismatch(f"features {fm.data.shape[:2]} and labels {lab.shape} differ in shape")
        mask = lab != IGNORE
        xs.append(fm.data[mask])
        ys.append(lab[mask])
    X = np.concatenate(xs).astype(np.float64)
    y = np.concatenate(ys).astype(np.intp)
    if not np.all(np.isfinite(X)):
        raise DataError("features must be finite")
    return X, y, config


def train_classifier(features, labels, weights, params=None, class_set=None):
    """Fit the classifier by gradient descent on the class-weighted cross-entropy.

    ``features``/``labels`` are a FeatureMap and label raster, or equal-length
    sequences of them. Returns a PixelClassifier whose ``loss_history`` holds
    the training loss before each epoch and after the last one.
    """
    params = params or TrainParams()
    class_set = class_set or TerrainClassSet()
    K = class_set.K
    beta = np.asarray(weights, dtype=float)
    if beta.shape != (K,):
        raise ShapeMismatch(f"{beta.size} class weights for {K} classes")
    X, y, config = _stack_scored(features, labels, K)
    n, F = X.shape
    if n < K:
        raise DataError(f"only {n} labelled pixels for {K} classes")
    present = np.unique(y)
    if present.size == 1:
        warnings.warn(f"only class '{class_set.names[present[0]]}' is labelled; fitting anyway",
                      stacklevel=2)
    if n > params.max_pixels:
        rng = np.random.default_rng(params.seed)
        keep = np.sort(rng.choice(n, size=params.max_pixels, replace=False))
        X, y = X[keep], y[keep]
        n = X.shape[0]

    # descend in whitened coordinates; folded back into raw-feature weights at the end
    mu = X.mean(axis=0)
    evals, evecs = np.linalg.eigh(np.cov(X, rowvar=False, bias=True).reshape(F, F))
    P = evecs / np.sqrt(np.maximum(evals, 1e-12 * max(evals.max(), 1e-300)))
    Z = np.empty((n, F + 1))
    Z[:, :F] = (X - mu) @ P
    Z[:, F] = 1.0
    w_pix = beta[y] / n
    onehot = np.zeros((n, K))
    onehot[np.arange(n), y] = 1.0
    # Hessian of softmax CE is bounded by (1/2) x x^T per sample
    L = 0.5 * beta[present].max() * float(np.linalg.eigvalsh(Z.T @ Z / n)[-1])
    base_step = params.lr / L

    V = np.zeros((K, F + 1))
    history = []
    floor = math.log(PROB_FLOOR)
    for epoch in range(params.epochs + 1):
        logits = Z @ V.T
        logits -= logits.max(axis=1, keepdims=True)
        e = np.exp(logits)
        s = e.sum(axis=1, keepdims=True)
        logp_true = logits[np.arange(n), y] - np.log(s[:, 0])
        loss = float(-(w_pix * np.maximum(logp_true, floor)).sum())
        if not math.isfinite(loss):
            raise TrainingDiverged(f"training loss became non-finite at epoch {epoch} "
                                   f"(lr={params.lr}, step={base_step:.3g})")
        history.append(loss)
        if epoch == params.epochs:
            break
        G = (e / s - onehot) * w_pix[:, None]
        step = base_step * params.decay ** (epoch // max(params.decay_every, 1))
        V -= step * (G.T @ Z)
        if not np.all(np.isfinite(V)):
            raise TrainingDiverged(f"weights became non-finite at epoch {epoch}")

    W = np.empty((K, F + 1))
    W[:, :F] = V[:, :F] @ P.T
    W[:, F] = V[:, F] - W[:, :F] @ mu
    log.info("trained on %d pixels, loss %.5f -> %.5f", n, history[0], history[-1])
    return PixelClassifier(W, dict(config), class_set, history)


def predict_logits(classifier, features: FeatureMap):
    F = classifier.weights.shape[1] - 1
    if features.n_features != F:
        raise ShapeMismatch(f"classifier expects {F} features, feature map has {features.n_features}")
    if features.config and classifier.feature_config and features.config != classifier.feature_config:
        raise DataError(f"feature settings {features.config} differ from the classifier's "
                        f"{classifier.feature_config}")
    return features.data @ classifier.weights[:, :F].T + classifier.weights[:, F]


def predict_probabilities(classifier, features: FeatureMap):
    """H x W x K softmax probabilities."""
    return softmax_probabilities(predict_logits(classifier, features))


def predict_labels(classifier, features: FeatureMap):
    return predict_logits(classifier, features).argmax(axis=2).astype(np.uint8)


def hyperparams_dict(params: TrainParams):
    return asdict(params)
