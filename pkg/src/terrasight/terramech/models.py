"""Per-terrain Gaussian property models fitted from identification results."""
from __future__ import annotations

import hashlib
import json
import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError

PARAMETERS = ("N", "phi")
UNITS = {"N": "1", "phi": "deg"}


@dataclass
class Gaussian:
    mu: float
    sigma: float
    n: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise DataError(f"negative standard deviation {self.sigma}")


@dataclass
class TerrainPropertyModel:
    """Mean and standard deviation of each dominant parameter, per terrain class."""
    entries: dict = field(default_factory=dict)   # class name -> {param -> Gaussian}

    def classes(self):
        return list(self.entries)

    def arrays(self, class_names, parameter):
        """(mu, sigma) vectors aligned with ``class_names``."""
        missing = [c for c in class_names if c not in self.entries]
        if missing:
            raise DataError(f"property model has no entry for classes {missing}")
        mu = np.array([self.entries[c][parameter].mu for c in class_names], dtype=float)
        sd = np.array([self.entries[c][parameter].sigma for c in class_names], dtype=float)
        return mu, sd

    def to_dict(self):
        return {c: {p: {"mu": g.mu, "sigma": g.sigma, "n": g.n} for p, g in params.items()}
                for c, params in self.entries.items()}

    @classmethod
    def from_dict(cls, d):
        entries = {}
        for c, params in d.items():
            try:
                entries[c] = {p: Gaussian(float(params[p]["mu"]), float(params[p]["sigma"]),
                                          int(params[p].get("n", 0))) for p in PARAMETERS}
            except KeyError as exc:
                raise DataError(f"property model entry '{c}' lacks field {exc}") from None
        return cls(entries)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def reference_property_model():
    """Published per-terrain regression values for the emulated Mars yard."""
    rows = {
        "soil": (1.36, 0.25, 29.6, 8.9),
        "stony soil": (1.28, 0.32, 36.9, 8.6),
        "gravel": (0.92, 0.27, 36.5, 12.4),
        "bedrock": (0.10, 0.01, 47.3, 18.7),
        "rock": (0.10, 0.01, 47.3, 18.7),
        "background": (0.0, 0.0, 0.0, 0.0),
    }
    return TerrainPropertyModel({c: {"N": Gaussian(a, b), "phi": Gaussian(p, q)}
                                 for c, (a, b, p, q) in rows.items()})


def untraversable_defaults(class_names, stiffest="bedrock", stiffest_values=None,
                           rock="rock", background="background"):
    """Entries for classes the rover cannot drive on.

    Rock mirrors the stiffest traversed class; background is all zeros. Pass
    ``stiffest_values`` (a {param: Gaussian} dict, e.g. from a fitted model) to
    override the built-in stiffest-class values.
    """
    out = {}
    if rock in class_names:
        src = stiffest_values or reference_property_model().entries[stiffest]
        out[rock] = {p: Gaussian(g.mu, g.sigma, 0) for p, g in src.items()}
    if background in class_names:
        out[background] = {p: Gaussian(0.0, 0.0, 0) for p in PARAMETERS}
    return TerrainPropertyModel(out)


def _mle(values):
    n = len(values)
    mu = math.fsum(values) / n
    var = math.fsum((v - mu) ** 2 for v in values) / n
    return mu, math.sqrt(var)


def fit_property_model(results, class_names, defaults=None, min_samples=2):
    """Gaussian MLE (divisor n) of N and phi per class from converged identifications.

    ``results`` are IdentifiedProperties with ``label`` set. Classes short of
    ``min_samples`` fall back to ``defaults`` (a TerrainPropertyModel); without
    a default they are an error. Sums are exactly rounded, so the result does
    not depend on sample order.
    """
    groups = defaultdict(lambda: {p: [] for p in PARAMETERS})
    for r in results:
        if not r.converged or r.label is None:
            continue
        if r.label not in class_names:
            raise DataError(f"identified sample labelled '{r.label}' is not in the class set")
        groups[r.label]["N"].append(float(r.N))
        groups[r.label]["phi"].append(float(r.phi))

    defaults = defaults.entries if defaults is not None else {}
    entries, short = {}, []
    for c in class_names:
        vals = groups.get(c)
        n = len(vals["N"]) if vals else 0
        if n >= min_samples:
            entries[c] = {}
            for p in PARAMETERS:
                mu, sd = _mle(vals[p])
                entries[c][p] = Gaussian(mu, sd, n)
        elif c in defaults:
            entries[c] = {p: Gaussian(g.mu, g.sigma, g.n) for p, g in defaults[c].items()}
        else:
            short.append(f"{c} ({n} samples)")
    if short:
        raise DataError(f"too few converged samples and no default for: {', '.join(short)}")
    return TerrainPropertyModel(entries)
