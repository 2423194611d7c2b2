from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import IGNORE
from ..errors import DataError, NoScoredPixels, ShapeMismatch

DEFAULT_NAMES = ("soil", "stony soil", "gravel", "bedrock", "rock", "background")
DEFAULT_COLORS = ((214, 160, 96), (170, 120, 70), (128, 128, 128),
                  (220, 210, 180), (70, 50, 40), (40, 90, 200))


@dataclass(frozen=True)
class TerrainClassSet:
    names: tuple = DEFAULT_NAMES
    colors: tuple = DEFAULT_COLORS

    def __post_init__(self):
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "colors", tuple(tuple(int(v) for v in c) for c in self.colors))
        if len(self.names) < 2:
            raise DataError("a class set needs at least two classes")
        if len(set(self.names)) != len(self.names) or any(not n for n in self.names):
            raise DataError(f"class names must be unique and non-empty: {self.names}")
        if len(self.colors) != len(self.names):
            raise DataError(f"{len(self.names)} classes but {len(self.colors)} display colors")
        if any(len(c) != 3 or not all(0 <= v <= 255 for v in c) for c in self.colors):
            raise DataError("display colors must be RGB triples in 0..255")
        if len(self.names) >= IGNORE:
            raise DataError(f"at most {IGNORE} classes fit beside the IGNORE value")

    @property
    def K(self):
        return len(self.names)

    def index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError(f"unknown terrain class '{name}'") from None

    def to_dict(self):
        return {"classes": [{"name": n, "color": list(c)} for n, c in zip(self.names, self.colors)]}

    @classmethod
    def from_dict(cls, d):
        items = d["classes"] if isinstance(d, dict) else d
        return cls(tuple(i["name"] for i in items), tuple(tuple(i["color"]) for i in items))


def check_labels(labels, K, require_scored=True):
    labels = np.asarray(labels)
    if labels.dtype != np.uint8:
        if np.any((labels < 0) | (labels > IGNORE)):
            raise DataError("label values must fit in 0..255")
        labels = labels.astype(np.uint8)
    bad = (labels != IGNORE) & (labels >= K)
    if bad.any():
        raise DataError(f"label value {int(labels[bad][0])} is not a class index below K={K} or IGNORE")
    if require_scored and not np.any(labels != IGNORE):
        raise NoScoredPixels("no scored pixels: every label is IGNORE")
    return labels


def class_proportions(label_images, K):
    """Fraction of scored pixels per class over a set of label rasters."""
    counts = np.zeros(K, dtype=np.int64)
    for lab in label_images:
        lab = check_labels(lab, K, require_scored=False)
        counts += np.bincount(lab[lab != IGNORE].ravel(), minlength=K)[:K]
    total = counts.sum()
    if total == 0:
        raise NoScoredPixels("no scored pixels in any label image")
    return counts / total


def same_shape(a, b, what="arrays"):
    if a.shape[:2] != b.shape[:2]:
        raise ShapeMismatch(f"{what} differ in shape: {a.shape[:2]} vs {b.shape[:2]}")
