"""Pipeline configuration file (JSON) with declared units.

Every physical quantity is stored in SI with angles in degrees. The
``units`` block must read exactly ``{"length": "m", "stress": "Pa", "angle": "deg"}``
so a file written for kPa or mm fails loudly instead of silently
mis-scaling the wheel model.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import DataError, UnitMismatch
from ..segmentation.classifier import TrainParams
from ..terramech.identify import SolverConfig
from ..terramech.wheel import DEFAULT_SOIL, DEFAULT_WHEEL, SoilNondominantParams, WheelGeometry
from .codecs import read_json

EXPECTED_UNITS = {"length": "m", "stress": "Pa", "angle": "deg"}
PATH_FIELDS = ("class_set", "property_model", "classifier", "camera")


@dataclass
class PipelineConfig:
    geometry: WheelGeometry = DEFAULT_WHEEL
    soil: SoilNondominantParams = DEFAULT_SOIL
    solver: SolverConfig = field(default_factory=SolverConfig)
    train: TrainParams = field(default_factory=TrainParams)
    class_weight_c: float = 1.1
    patch_radius: int = 4
    smoothing_window_s: float = 0.5
    z_tol: float = 0.03
    full_scale: dict = field(default_factory=lambda: {"N": 2.0, "phi": 60.0})
    thresholds: dict = field(default_factory=lambda: {"N_max": 1.2, "phi_min": 30.0,
                                                       "sigma_max": {"N": 0.3, "phi": 12.0}})
    paths: dict = field(default_factory=dict)
    seed: int = 0


def _section(cls, data, name):
    if data is None:
        return None
    if not isinstance(data, dict):
        raise DataError(f"config section '{name}' must be an object")
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise DataError(f"config section '{name}' has unknown fields {unknown}")
    kwargs = {k: tuple(v) if isinstance(v, list) else v for k, v in data.items()}
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise DataError(f"config section '{name}': {exc}") from None


def check_units(units, where="config"):
    if units is None:
        raise UnitMismatch(f"{where}: missing 'units' block, expected {EXPECTED_UNITS}")
    for key, tag in EXPECTED_UNITS.items():
        if units.get(key) != tag:
            raise UnitMismatch(f"{where}: units.{key} is '{units.get(key)}', expected '{tag}'")
    extra = sorted(set(units) - set(EXPECTED_UNITS))
    if extra:
        raise UnitMismatch(f"{where}: unrecognised unit tags {extra}")


def load_config(path) -> PipelineConfig:
    """Read and validate a config file; relative paths resolve against its directory."""
    path = Path(path)
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise DataError(f"{path}: config must be a JSON object")
    check_units(doc.get("units"), str(path))
    cfg = PipelineConfig()
    for name, cls in (("geometry", WheelGeometry), ("soil", SoilNondominantParams),
                      ("solver", SolverConfig), ("train", TrainParams)):
        sec = _section(cls, doc.get(name), name)
        if sec is not None:
            setattr(cfg, name, sec)
    scalars = ("class_weight_c", "patch_radius", "smoothing_window_s", "z_tol", "seed")
    for key in scalars:
        if key in doc:
            setattr(cfg, key, type(getattr(cfg, key))(doc[key]))
    for key in ("full_scale", "thresholds"):
        if key in doc:
            merged = dict(getattr(cfg, key))
            merged.update(doc[key])
            setattr(cfg, key, merged)
    paths = doc.get("paths", {})
    unknown = sorted(set(paths) - set(PATH_FIELDS))
    if unknown:
        raise DataError(f"{path}: unknown path fields {unknown}")
    for key, rel in paths.items():
        p = (path.parent / rel).resolve()
        if not p.exists():
            raise DataError(f"{path}: paths.{key} points to missing file {p}")
        cfg.paths[key] = p
    known = {"units", "geometry", "soil", "solver", "train", "full_scale", "thresholds", "paths", *scalars}
    extra = sorted(set(doc) - known)
    if extra:
        raise DataError(f"{path}: unknown config fields {extra}")
    return cfg


def config_to_dict(cfg: PipelineConfig):
    return {
        "units": dict(EXPECTED_UNITS),
        "geometry": dataclasses.asdict(cfg.geometry),
        "soil": dataclasses.asdict(cfg.soil),
        "solver": dataclasses.asdict(cfg.solver),
        "train": dataclasses.asdict(cfg.train),
        "class_weight_c": cfg.class_weight_c,
        "patch_radius": cfg.patch_radius,
        "smoothing_window_s": cfg.smoothing_window_s,
        "z_tol": cfg.z_tol,
        "full_scale": dict(cfg.full_scale),
        "thresholds": cfg.thresholds,
        "paths": {k: str(v) for k, v in cfg.paths.items()},
        "seed": cfg.seed,
    }
