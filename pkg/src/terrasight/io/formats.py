"""Readers and writers for the pipeline's domain files, built on the generic codecs."""
from __future__ import annotations

import math

import numpy as np

from ..errors import DataError
from ..inference.maps import FLAG_LEGEND, PropertyMap
from ..labeling.geometry import CameraModel, Pose
from ..segmentation.classes import TerrainClassSet
from ..segmentation.classifier import PixelClassifier
from ..terramech.identify import IdentifiedProperties, InteractionSample
from ..terramech.models import PARAMETERS, UNITS, TerrainPropertyModel
from .codecs import (fmt, parse_float, read_csv, read_json, read_tensor, write_csv, write_json,
                     write_tensor)

LOG_COLUMNS = ("t", "F_N", "M_R", "omega", "v", "z", "label")
REPORT_COLUMNS = ("t", "label", "status", "N", "phi", "s", "theta1", "converged",
                  "residual_F_N", "residual_M_R", "slip_clamped", "reason")
ROUTE_COLUMNS = ("wheel", "row", "col")
PREDICTION_COLUMNS = ("wheel", "index", "row", "col", "mu_N", "sigma_N", "mu_phi", "sigma_phi",
                      "truth_N", "truth_phi")
POSE_COLUMNS = ("frame", "qw", "qx", "qy", "qz", "tx", "ty", "tz")


def _opt(x):
    return "" if x is None or (isinstance(x, float) and math.isnan(x)) else fmt(x)


def _opt_float(row, col, path):
    return math.nan if row.get(col, "") in ("", None) else parse_float(row, col, path)


# ---------------------------------------------------------------- interaction logs

def read_interaction_log(path):
    rows = read_csv(path, LOG_COLUMNS)
    out = []
    for row in rows:
        vals = {c: parse_float(row, c, path) for c in LOG_COLUMNS[:-1]}
        bad = [c for c, v in vals.items() if not math.isfinite(v)]
        if bad:
            raise DataError(f"{path}: line {row['_line']} column '{bad[0]}' is not finite")
        out.append(InteractionSample(label=row["label"] or None, **vals))
    return out


def write_interaction_log(path, samples):
    write_csv(path, LOG_COLUMNS, [
        {**{c: fmt(getattr(s, c)) for c in LOG_COLUMNS[:-1]}, "label": s.label or ""} for s in samples])


# ---------------------------------------------------------------- identification report

def write_identification_report(path, report):
    rows = []
    for r in report.results:
        rows.append({"t": _opt(r.t), "label": r.label or "", "status": "ok" if r.converged else "unconverged",
                     "N": fmt(r.N), "phi": fmt(r.phi), "s": fmt(r.s), "theta1": fmt(r.theta1),
                     "converged": int(r.converged), "residual_F_N": fmt(r.residuals[0]),
                     "residual_M_R": fmt(r.residuals[1]), "slip_clamped": int(r.slip_clamped), "reason": ""})
    for sample, reason in report.rejected:
        rows.append({"t": fmt(sample.t), "label": sample.label or "", "status": "rejected", "reason": reason})
    write_csv(path, REPORT_COLUMNS, rows)


def read_identification_report(path):
    """Identified rows (converged or not); rejected rows are skipped."""
    out = []
    for row in read_csv(path, ("label", "N", "phi", "converged")):
        if row.get("status") == "rejected":
            continue
        conv = row["converged"].strip().lower()
        if conv not in ("0", "1", "true", "false"):
            raise DataError(f"{path}: line {row['_line']} column 'converged': '{row['converged']}' is not a flag")
        out.append(IdentifiedProperties(
            N=parse_float(row, "N", path), phi=parse_float(row, "phi", path),
            s=_opt_float(row, "s", path), theta1=_opt_float(row, "theta1", path),
            converged=conv in ("1", "true"),
            residuals=(_opt_float(row, "residual_F_N", path), _opt_float(row, "residual_M_R", path)),
            label=row["label"] or None, t=_opt_float(row, "t", path),
            slip_clamped=row.get("slip_clamped", "0") in ("1", "true")))
    return out


# ---------------------------------------------------------------- JSON documents

def write_property_model(path, model: TerrainPropertyModel):
    write_json(path, model.to_dict())


def read_property_model(path):
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise DataError(f"{path}: property model must be a JSON object")
    try:
        return TerrainPropertyModel.from_dict(doc)
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_classifier(path, clf: PixelClassifier):
    write_json(path, clf.to_dict())


def read_classifier(path):
    try:
        return PixelClassifier.from_dict(read_json(path))
    except DataError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def read_class_set(path):
    try:
        return TerrainClassSet.from_dict(read_json(path))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_class_set(path, class_set):
    write_json(path, class_set.to_dict())


def read_camera(path):
    try:
        return CameraModel.from_dict(read_json(path))
    except DataError as exc:
        raise DataError(f"{path}: {exc}") from None


def write_camera(path, cam):
    write_json(path, cam.to_dict())


# ---------------------------------------------------------------- rasters

def write_property_map(path, pmap: PropertyMap, model_hash=None):
    """float32 H x W x 2 tensor, channel 0 the mean and channel 1 the std."""
    write_tensor(path, np.stack([pmap.mean, pmap.std], axis=-1), "float32",
                 parameter=pmap.parameter, units=pmap.units, channels=["mean", "std"],
                 model_hash=model_hash)


def read_property_map(path):
    arr, meta = read_tensor(path, expect_ndim=3)
    if meta.get("parameter") not in PARAMETERS or arr.shape[2] != 2:
        raise DataError(f"{path}: not a property map (parameter={meta.get('parameter')}, shape {arr.shape})")
    if meta.get("units") != UNITS[meta["parameter"]]:
        raise DataError(f"{path}: units '{meta.get('units')}' do not match '{UNITS[meta['parameter']]}'")
    pm = PropertyMap(meta["parameter"], arr[..., 0].astype(np.float64), arr[..., 1].astype(np.float64))
    return pm, meta


def write_flags(path, flags, thresholds):
    write_tensor(path, flags, "uint8", legend=dict(FLAG_LEGEND), thresholds=thresholds)


def read_probability_map(path, class_set=None):
    arr, meta = read_tensor(path, expect_ndim=3)
    if meta["dtype"] != "float32":
        raise DataError(f"{path}: probability map must be float32, sidecar says {meta['dtype']}")
    classes = meta.get("classes")
    if class_set is not None and classes is not None and list(classes) != list(class_set.names):
        raise DataError(f"{path}: sidecar classes {classes} differ from the class set {list(class_set.names)}")
    if classes is not None and len(classes) != arr.shape[2]:
        raise DataError(f"{path}: {len(classes)} classes in sidecar but {arr.shape[2]} channels")
    return arr, meta


# ---------------------------------------------------------------- routes

def read_route(path):
    """wheel id -> (rows, cols, arclength or None), wheels in order of first appearance."""
    rows = read_csv(path, ROUTE_COLUMNS)
    if not rows:
        raise DataError(f"{path}: route has no points")
    tracks = {}
    for row in rows:
        tr = tracks.setdefault(row["wheel"], ([], [], []))
        tr[0].append(parse_float(row, "row", path))
        tr[1].append(parse_float(row, "col", path))
        tr[2].append(_opt_float(row, "arclength", path))
    out = {}
    for w, (r, c, a) in tracks.items():
        a = np.asarray(a)
        out[w] = (np.asarray(r), np.asarray(c), None if np.all(np.isnan(a)) else a)
    return out


def read_route_truth(path):
    """Optional truth_N / truth_phi columns of a route file, NaN where blank."""
    rows = read_csv(path, ROUTE_COLUMNS)
    out = {}
    for row in rows:
        d = out.setdefault(row["wheel"], {"N": [], "phi": []})
        d["N"].append(_opt_float(row, "truth_N", path))
        d["phi"].append(_opt_float(row, "truth_phi", path))
    return {w: {p: np.asarray(v) for p, v in d.items()} for w, d in out.items()}


def write_route_prediction(path, route, prediction, truth=None):
    rows = []
    for w, (r, c, _a) in route.items():
        pred = prediction[w]
        tr = (truth or {}).get(w, {})
        for i in range(len(r)):
            rows.append({"wheel": w, "index": i, "row": fmt(r[i]), "col": fmt(c[i]),
                         **{k: fmt(pred[k][i]) for k in ("mu_N", "sigma_N", "mu_phi", "sigma_phi")},
                         "truth_N": _opt(tr["N"][i]) if "N" in tr else "",
                         "truth_phi": _opt(tr["phi"][i]) if "phi" in tr else ""})
    write_csv(path, PREDICTION_COLUMNS, rows)


def read_route_prediction(path):
    rows = read_csv(path, PREDICTION_COLUMNS)
    cols = {k: np.array([_opt_float(r, k, path) for r in rows]) for k in PREDICTION_COLUMNS[2:]}
    cols["wheel"] = [r["wheel"] for r in rows]
    return cols


# ---------------------------------------------------------------- poses

def read_poses(path):
    out = {}
    for row in read_csv(path, POSE_COLUMNS):
        v = [parse_float(row, c, path) for c in POSE_COLUMNS[1:]]
        try:
            out[row["frame"]] = Pose.from_quaternion(*v)
        except DataError as exc:
            raise DataError(f"{path}: line {row['_line']} (frame {row['frame']}): {exc}") from None
    return out


def write_poses(path, poses):
    from scipy.spatial.transform import Rotation

    rows = []
    for frame, pose in poses.items():
        qx, qy, qz, qw = Rotation.from_matrix(pose.rotation).as_quat()
        rows.append({"frame": frame, "qw": fmt(qw), "qx": fmt(qx), "qy": fmt(qy), "qz": fmt(qz),
                     **{k: fmt(x) for k, x in zip(("tx", "ty", "tz"), pose.translation)}})
    write_csv(path, POSE_COLUMNS, rows)


# ---------------------------------------------------------------- metrics

def metrics_rows(m, class_names):
    rows = [{"name": n, "iou": _opt(m["per_class_iou"][k]), "recall": _opt(m["per_class_recall"][k])}
            for k, n in enumerate(class_names)]
    rows.append({"name": "mIoU", "iou": _opt(m["mIoU"]), "recall": ""})
    rows.append({"name": "pixel_accuracy", "iou": "", "recall": _opt(m["pixel_accuracy"])})
    return rows


def write_metrics(path, m, class_names):
    write_csv(path, ("name", "iou", "recall"), metrics_rows(m, class_names))


def metrics_table(m, class_names):
    """Fixed-width text table of per-class IoU and recall."""
    width = max(len(n) for n in [*class_names, "pixel accuracy"])
    lines = [f"{'class':<{width}}  {'IoU':>7}  {'recall':>7}"]

    def cell(x):
        return f"{x:7.4f}" if x is not None and not math.isnan(x) else f"{'-':>7}"
    for k, n in enumerate(class_names):
        lines.append(f"{n:<{width}}  {cell(m['per_class_iou'][k])}  {cell(m['per_class_recall'][k])}")
    lines.append(f"{'mIoU':<{width}}  {cell(m['mIoU'])}")
    lines.append(f"{'pixel accuracy':<{width}}  {cell(m['pixel_accuracy'])}")
    return "\n".join(lines)
