"""terrasight command line.

Every subcommand prints human-readable progress and ends stdout with one
JSON object summarising the run. Exit status: 0 success, 1 data error,
2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import IGNORE, __version__
from .errors import DataError
from .inference import (FULL_SCALE, full_scale_error, hazard_flags, infer_property_maps,
                        interval_coverage, predict_route)
from .io import codecs, formats
from .io.config import PipelineConfig, load_config
from .io.render import overlay, render_classes, render_heatmap
from .labeling import propagate_labels
from .segmentation import (TerrainClassSet, TrainParams, annotation_ratio_experiment, class_proportions,
                           compute_class_weights, confusion, extract_features, metrics,
                           predict_labels, predict_probabilities, train_classifier, train_test_corpus)
from .segmentation.corpus import CorpusSample
from .terramech import (fit_property_model, identify_log, reference_property_model, smooth_log,
                        synthetic_log, untraversable_defaults)

log = logging.getLogger("terrasight")

ANNOTATION_SUFFIX = {"full": ".labels.bin", "partial": ".partial.bin"}


def _summary(command, **fields):
    print(json.dumps({"command": command, "status": "ok", **fields}, sort_keys=True, allow_nan=False,
                     default=_jsonable))
    return 0


def _jsonable(x):
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, Path):
        return str(x)
    raise TypeError(f"not JSON serialisable: {type(x).__name__}")


def _clean(x):
    """NaN to None so the summary stays strict JSON."""
    if isinstance(x, float) and math.isnan(x):
        return None
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    return x


def _class_set(args, cfg):
    if getattr(args, "classes", None):
        return formats.read_class_set(args.classes)
    if "class_set" in cfg.paths:
        return formats.read_class_set(cfg.paths["class_set"])
    return TerrainClassSet()


def _train_params(args, cfg):
    p = TrainParams(**vars(cfg.train))
    p.seed = args.seed if args.seed is not None else cfg.seed
    for name in ("epochs", "lr"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(p, name, v)
    return p


# ---------------------------------------------------------------- datasets

def _label_files(paths, annotation):
    """Expand directories to their sorted label rasters of the chosen annotation."""
    suffix = ANNOTATION_SUFFIX[annotation]
    out = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(p.glob("*" + suffix))
            if not found:
                raise DataError(f"{p}: no '*{suffix}' label rasters")
            out.extend(found)
        else:
            out.append(p)
    return out


def _stem(path, suffix):
    name = Path(path).name
    return name[:-len(suffix)] if name.endswith(suffix) else Path(path).stem


def load_dataset(directory, need_partial=False):
    """CorpusSamples from ``<stem>.ppm`` + ``<stem>.labels.bin`` (+ ``<stem>.partial.bin``)."""
    directory = Path(directory)
    images = sorted(directory.glob("*.ppm"))
    if not images:
        raise DataError(f"{directory}: no .ppm images")
    out = []
    for img_path in images:
        stem = img_path.name[:-4]
        image = codecs.read_ppm(img_path)
        labels, _ = codecs.read_labels(directory / (stem + ".labels.bin"))
        partial_path = directory / (stem + ".partial.bin")
        partial = None
        if partial_path.exists() or need_partial:
            partial, _ = codecs.read_labels(partial_path)
        for name, lab in (("labels", labels), ("partial", partial)):
            if lab is not None and lab.shape != image.shape[:2]:
                raise DataError(f"{directory / stem}: {name} shape {lab.shape} differs from image {image.shape[:2]}")
        out.append(CorpusSample(image, labels, partial))
    return out, [p.name[:-4] for p in images]


def write_dataset(directory, samples, class_set):
    directory = Path(directory)
    names = list(class_set.names)
    for i, s in enumerate(samples):
        stem = f"{i:04d}"
        codecs.write_ppm(directory / f"{stem}.ppm", s.image)
        codecs.write_labels(directory / f"{stem}.labels.bin", s.labels, names)
        codecs.write_labels(directory / f"{stem}.partial.bin", s.partial, names)


# ---------------------------------------------------------------- segmentation commands

def cmd_synth_corpus(args, cfg):
    cs = _class_set(args, cfg)
    seed = args.seed if args.seed is not None else cfg.seed
    train, test = train_test_corpus(args.n_train, args.n_test, seed, cs, args.size)
    out = Path(args.out)
    write_dataset(out / "train", train, cs)
    write_dataset(out / "test", test, cs)
    formats.write_class_set(out / "classes.json", cs)
    print(f"wrote {len(train)} train and {len(test)} test images to {out}")
    return _summary("synth-corpus", n_train=len(train), n_test=len(test), size=args.size, seed=seed)


def cmd_weights(args, cfg):
    cs = _class_set(args, cfg)
    files = _label_files(args.labels, args.annotation)
    rasters = [codecs.read_labels(f)[0] for f in files]
    props = class_proportions(rasters, cs.K)
    c = args.c if args.c is not None else cfg.class_weight_c
    beta = compute_class_weights(props, c)
    doc = {"c": c, **cs.to_dict(), "proportions": props.tolist(), "weights": beta.tolist()}
    if args.out:
        codecs.write_json(args.out, doc)
    for n, p, b in zip(cs.names, props, beta):
        print(f"{n:<12} p={p:.6f} weight={b:.6f}")
    return _summary("weights", files=len(files), weights=beta.tolist(), proportions=props.tolist())


def _read_weights(path, cs):
    doc = codecs.read_json(path)
    if "weights" not in doc:
        raise DataError(f"{path}: lacks field 'weights'")
    w = np.asarray(doc["weights"], dtype=float)
    if w.shape != (cs.K,):
        raise DataError(f"{path}: {w.size} weights for {cs.K} classes")
    return w


def cmd_train(args, cfg):
    cs = _class_set(args, cfg)
    samples, _ = load_dataset(args.data, need_partial=args.annotation == "partial")
    labels = [s.labels if args.annotation == "full" else s.partial for s in samples]
    radius = args.patch_radius if args.patch_radius is not None else cfg.patch_radius
    feats = [extract_features(s.image, radius) for s in samples]
    if args.weights:
        beta = _read_weights(args.weights, cs)
    else:
        beta = compute_class_weights(class_proportions(labels, cs.K), cfg.class_weight_c)
    params = _train_params(args, cfg)
    t0 = time.perf_counter()
    clf = train_classifier(feats, labels, beta, params, cs)
    log.info("training took %.2f s", time.perf_counter() - t0)
    formats.write_classifier(args.out, clf)
    print(f"trained on {len(samples)} images, loss {clf.loss_history[0]:.5f} -> {clf.final_loss:.5f}")
    return _summary("train", images=len(samples), epochs=params.epochs, final_loss=clf.final_loss,
                    initial_loss=clf.loss_history[0], out=args.out)


def cmd_predict(args, cfg):
    clf = formats.read_classifier(args.classifier)
    out = Path(args.out_dir)
    radius = clf.feature_config.get("patch_radius", cfg.patch_radius)
    names = list(clf.class_set.names)
    written = []
    for img_path in map(Path, args.images):
        feats = extract_features(codecs.read_ppm(img_path), radius)
        stem = img_path.name[:-4] if img_path.name.endswith(".ppm") else img_path.stem
        prob = predict_probabilities(clf, feats)
        codecs.write_tensor(out / f"{stem}.prob.bin", prob, "float32", classes=names)
        codecs.write_labels(out / f"{stem}.pred.bin", predict_labels(clf, feats), names)
        written.append(stem)
    print(f"predicted {len(written)} images into {out}")
    return _summary("predict", images=len(written))


def cmd_metrics(args, cfg):
    cs = _class_set(args, cfg)
    preds = [Path(p) for p in args.pred]
    truths = [Path(p) for p in args.truth]
    if len(preds) == 1 and preds[0].is_dir():
        preds = sorted(preds[0].glob("*.pred.bin"))
    if len(truths) == 1 and truths[0].is_dir():
        truths = sorted(truths[0].glob("*.labels.bin"))
    if len(preds) != len(truths) or not preds:
        raise DataError(f"{len(preds)} prediction rasters but {len(truths)} truth rasters")
    cm = np.zeros((cs.K, cs.K), dtype=np.int64)
    for p, t in zip(preds, truths):
        if _stem(p, ".pred.bin") != _stem(t, ".labels.bin"):
            raise DataError(f"prediction {p.name} does not pair with truth {t.name}")
        pred, _ = codecs.read_labels(p)
        truth, _ = codecs.read_labels(t)
        try:
            cm += confusion(pred, truth, cs.K)
        except DataError as exc:
            raise type(exc)(f"{p} vs {t}: {exc}") from None
    m = metrics(cm, args.mode)
    if args.out:
        formats.write_metrics(args.out, m, cs.names)
    print(formats.metrics_table(m, cs.names))
    return _summary("metrics", mIoU=_clean(m["mIoU"]), pixel_accuracy=m["pixel_accuracy"],
                    per_class_iou=_clean(m["per_class_iou"].tolist()),
                    per_class_recall=_clean(m["per_class_recall"].tolist()), mode=args.mode)


def cmd_ratio_exp(args, cfg):
    from scipy.stats import spearmanr

    cs = _class_set(args, cfg)
    train, _ = load_dataset(args.train, need_partial=True)
    test, _ = load_dataset(args.test)
    params = _train_params(args, cfg)
    radius = args.patch_radius if args.patch_radius is not None else cfg.patch_radius
    rows = annotation_ratio_experiment(train, test, args.ratios, params, cs, radius,
                                       cfg.class_weight_c, args.mode)
    codecs.write_csv(args.out, ("ratio", "n_full", "accuracy", "mIoU", "train_loss"),
                     [{k: (codecs.fmt(v) if isinstance(v, float) else v) for k, v in r.items()} for r in rows])
    for r in rows:
        print(f"ratio {r['ratio']:.2f} ({r['n_full']} full): accuracy {r['accuracy']:.4f} mIoU {r['mIoU']:.4f}")
    acc = [r["accuracy"] for r in rows]
    rho = float("nan")
    if len(rows) > 1 and np.ptp(acc) > 0:
        rho = float(spearmanr([r["ratio"] for r in rows], acc)[0])
    return _summary("ratio-exp", ratios=list(args.ratios), accuracy=acc, mIoU=[r["mIoU"] for r in rows],
                    spearman=_clean(rho))


# ---------------------------------------------------------------- terramechanics commands

def cmd_synth_log(args, cfg):
    cs = _class_set(args, cfg)
    model = formats.read_property_model(args.model) if args.model else reference_property_model()
    seed = args.seed if args.seed is not None else cfg.seed
    rng = np.random.default_rng(seed)
    if args.identified:
        rows = _draw_identified(model, cs.names, args.per_class, rng)
        codecs.write_csv(args.out, formats.REPORT_COLUMNS, rows)
        print(f"wrote {len(rows)} identified samples to {args.out}")
        return _summary("synth-log", samples=len(rows), kind="identified", seed=seed)
    samples = synthetic_log(model, cs.names, args.per_class, rng, cfg.geometry, cfg.soil,
                            cfg.solver.N_bounds, cfg.solver.phi_bounds)
    formats.write_interaction_log(args.out, samples)
    print(f"wrote {len(samples)} interaction samples to {args.out}")
    return _summary("synth-log", samples=len(samples), kind="interaction", seed=seed)


def _draw_identified(model, class_names, n, rng):
    """Identification rows drawn straight from each class Gaussian (no forward model, no search box)."""
    rows, t = [], 0.0
    for c in class_names:
        if c not in model.entries:
            continue
        gN, gp = model.entries[c]["N"], model.entries[c]["phi"]
        N = rng.normal(gN.mu, gN.sigma, n)
        phi = rng.normal(gp.mu, gp.sigma, n)
        for a, b in zip(N, phi):
            rows.append({"t": codecs.fmt(round(t, 6)), "label": c, "status": "ok", "N": codecs.fmt(a),
                         "phi": codecs.fmt(b), "converged": 1})
            t += 0.01
    return rows


def cmd_identify(args, cfg):
    samples = formats.read_interaction_log(args.log)
    if not samples:
        raise DataError(f"{args.log}: interaction log has no samples")
    window = args.smooth if args.smooth is not None else cfg.smoothing_window_s
    try:
        samples = smooth_log(samples, window)
    except ValueError as exc:
        raise DataError(f"{args.log}: {exc}") from None
    report = identify_log(samples, cfg.geometry, cfg.soil, cfg.solver)
    formats.write_identification_report(args.out, report)
    n_conv = sum(r.converged for r in report.results)
    for sample, reason in report.rejected[:10]:
        print(f"rejected t={sample.t}: {reason}")
    print(f"identified {len(report.results)} samples ({n_conv} converged), rejected {len(report.rejected)}")
    return _summary("identify", samples=len(samples), identified=len(report.results), converged=n_conv,
                    rejected=len(report.rejected), clamped=sum(r.slip_clamped for r in report.results))


def cmd_fit(args, cfg):
    cs = _class_set(args, cfg)
    results = formats.read_identification_report(args.report)
    traversed = [c for c in cs.names if any(r.label == c and r.converged for r in results)]
    stiff = None
    if "bedrock" in traversed:
        fitted = fit_property_model([r for r in results if r.label == "bedrock"], ["bedrock"],
                                    min_samples=args.min_samples)
        stiff = fitted.entries["bedrock"]
    defaults = untraversable_defaults(cs.names, stiffest_values=stiff)
    model = fit_property_model(results, list(cs.names), defaults, args.min_samples)
    formats.write_property_model(args.out, model)
    for c in cs.names:
        e = model.entries[c]
        print(f"{c:<12} N {e['N'].mu:.4f} +/- {e['N'].sigma:.4f}   phi {e['phi'].mu:.3f} +/- {e['phi'].sigma:.3f}"
              f"   (n={e['N'].n})")
    return _summary("fit", model=model.to_dict(), digest=model.digest())


# ---------------------------------------------------------------- inference commands

def cmd_infer(args, cfg):
    cs = _class_set(args, cfg)
    model = formats.read_property_model(args.model)
    prob, meta = formats.read_probability_map(args.prob, cs)
    names = meta.get("classes") or list(cs.names)
    maps = infer_property_maps(prob, model, names, threads=args.threads)
    out = Path(args.out_dir)
    digest = model.digest()
    stats = {}
    for p, pm in maps.items():
        formats.write_property_map(out / f"{p}.bin", pm, digest)
        stats[p] = {"mean_min": float(pm.mean.min()), "mean_max": float(pm.mean.max()),
                    "std_max": float(pm.std.max())}
        print(f"{p}: mean in [{stats[p]['mean_min']:.4f}, {stats[p]['mean_max']:.4f}], max std {stats[p]['std_max']:.4f}")
    return _summary("infer", shape=list(prob.shape[:2]), model_digest=digest, maps=stats)


def _read_maps(directory):
    directory = Path(directory)
    maps = {}
    for p in ("N", "phi"):
        maps[p], _ = formats.read_property_map(directory / f"{p}.bin")
    if maps["N"].shape != maps["phi"].shape:
        raise DataError(f"{directory}: N and phi maps differ in shape")
    return maps


def cmd_route(args, cfg):
    maps = _read_maps(args.maps)
    route = formats.read_route(args.route)
    truth = formats.read_route_truth(args.route)
    pred = predict_route(maps, {w: (r, c) for w, (r, c, _a) in route.items()})
    formats.write_route_prediction(args.out, route, pred, truth)
    fs = dict(FULL_SCALE)
    fs.update(cfg.full_scale)
    k = args.multiplier
    result = {}
    for p in ("N", "phi"):
        mu = np.concatenate([pred[w][f"mu_{p}"] for w in route])
        sd = np.concatenate([pred[w][f"sigma_{p}"] for w in route])
        tr = np.concatenate([truth[w][p] for w in route])
        have = ~np.isnan(tr)
        if have.any():
            result[p] = {"fse": full_scale_error(mu[have], tr[have], fs[p]),
                         "coverage": interval_coverage(mu[have], sd[have], tr[have], k), "points": int(have.sum())}
    n_points = sum(len(r) for r, _c, _a in route.values())
    if result:
        fse = float(np.mean([v["fse"] for v in result.values()]))
        cov = float(np.mean([v["coverage"] for v in result.values()]))
        for p, v in result.items():
            print(f"{p}: fse={v['fse']:.4f}% coverage={v['coverage']:.4f} ({v['points']} points)")
        print(f"fse={fse!r} coverage={cov!r}")
        return _summary("route", wheels=list(route), points=n_points, fse=fse, coverage=cov, per_parameter=result,
                        multiplier=k)
    print(f"predicted {n_points} route points (no truth columns, no error summary)")
    return _summary("route", wheels=list(route), points=n_points, fse=None, coverage=None)


def cmd_flags(args, cfg):
    maps = _read_maps(args.maps)
    th = dict(cfg.thresholds)
    if args.N_max is not None:
        th["N_max"] = args.N_max
    if args.phi_min is not None:
        th["phi_min"] = args.phi_min
    sigma = dict(th.get("sigma_max") or {})
    if args.sigma_N_max is not None:
        sigma["N"] = args.sigma_N_max
    if args.sigma_phi_max is not None:
        sigma["phi"] = args.sigma_phi_max
    th["sigma_max"] = sigma
    flags, summary = hazard_flags(maps, th["N_max"], th["phi_min"], sigma)
    formats.write_flags(args.out, flags, th)
    print(", ".join(f"{k}={v}" for k, v in summary.items()))
    return _summary("flags", thresholds=th, **summary)


# ---------------------------------------------------------------- labeling commands

def cmd_synth_scene(args, cfg):
    from .labeling import DEFAULT_CAMERA, camera_pair, render_plane

    cs = _class_set(args, cfg)
    src, dst = camera_pair(tuple(args.shift), args.yaw)
    cam = DEFAULT_CAMERA
    out = Path(args.out)
    d_src, l_src = render_plane(cam, src, cs.K)
    d_dst, l_dst = render_plane(cam, dst, cs.K)
    formats.write_camera(out / "camera.json", cam)
    formats.write_poses(out / "poses.csv", {"src": src, "dst": dst})
    codecs.write_tensor(out / "src.depth.bin", d_src, "float32", units="m")
    codecs.write_tensor(out / "dst.depth.bin", d_dst, "float32", units="m")
    codecs.write_labels(out / "src.labels.bin", l_src, list(cs.names))
    codecs.write_labels(out / "dst.labels.bin", l_dst, list(cs.names))
    print(f"wrote analytic ground-plane scene to {out}")
    return _summary("synth-scene", shape=[cam.height, cam.width], shift=list(args.shift), yaw=args.yaw)


def cmd_propagate(args, cfg):
    cam = formats.read_camera(args.camera if args.camera else cfg.paths.get("camera") or _missing("--camera"))
    poses = formats.read_poses(args.poses)
    for f in (args.src_frame, args.dst_frame):
        if f not in poses:
            raise DataError(f"{args.poses}: no pose for frame '{f}'")
    labels, meta = codecs.read_labels(args.src_labels)
    d_src, _ = codecs.read_tensor(args.src_depth, expect_ndim=2)
    d_dst, _ = codecs.read_tensor(args.dst_depth, expect_ndim=2)
    z_tol = args.z_tol if args.z_tol is not None else cfg.z_tol
    out, stats = propagate_labels(labels, d_src, poses[args.src_frame], poses[args.dst_frame], d_dst, cam,
                                  z_tol, K=len(meta["classes"]) if "classes" in meta else None)
    codecs.write_labels(args.out, out, meta.get("classes"))
    fields = stats.as_dict()
    if args.truth:
        truth, _ = codecs.read_labels(args.truth)
        valid = (out != IGNORE) & (truth != IGNORE)
        fields["compared"] = int(valid.sum())
        fields["match"] = float((out[valid] == truth[valid]).mean()) if valid.any() else None
    print(", ".join(f"{k}={v}" for k, v in fields.items()))
    return _summary("propagate", **fields)


def _missing(flag):
    raise DataError(f"{flag} is required (or set it in the config paths)")


# ---------------------------------------------------------------- rendering

def cmd_render(args, cfg):
    if args.kind == "heatmap":
        arr, meta = codecs.read_tensor(args.input)
        if arr.ndim == 3:
            if not 0 <= args.channel < arr.shape[2]:
                raise DataError(f"{args.input}: channel {args.channel} outside 0..{arr.shape[2] - 1}")
            arr = arr[..., args.channel]
        if args.range is None:
            raise DataError("heatmap rendering needs --range MIN MAX")
        img = render_heatmap(arr, args.range, args.colormap)
    else:
        cs = _class_set(args, cfg)
        labels, _ = codecs.read_labels(args.input)
        img = render_classes(labels, cs.colors)
        if args.kind == "overlay":
            if not args.image:
                raise DataError("overlay rendering needs --image")
            base = codecs.read_ppm(args.image)
            if base.shape[:2] != labels.shape:
                raise DataError(f"{args.image}: shape {base.shape[:2]} differs from labels {labels.shape}")
            img = overlay(base, img, args.alpha, labels != IGNORE)
    codecs.write_ppm(args.out, img)
    print(f"wrote {img.shape[1]}x{img.shape[0]} image to {args.out}")
    return _summary("render", kind=args.kind, shape=list(img.shape[:2]), out=args.out)


# ---------------------------------------------------------------- parser

def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=d, help="random seed (default: config seed, else 0)")
    p.add_argument("--threads", type=int, default=argparse.SUPPRESS if suppress else 1,
                   help="worker threads for data-parallel steps")
    p.add_argument("--config", default=d, help="pipeline configuration JSON")
    p.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)


def build_parser():
    parser = argparse.ArgumentParser(prog="terrasight", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        _global_flags(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("synth-corpus", cmd_synth_corpus, "write a procedural textured terrain corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--n-train", type=int, default=20)
    p.add_argument("--n-test", type=int, default=10)
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--classes")

    p = add("weights", cmd_weights, "class-balancing loss weights from label statistics")
    p.add_argument("labels", nargs="+", help="label rasters or dataset directories")
    p.add_argument("--annotation", choices=ANNOTATION_SUFFIX, default="full")
    p.add_argument("--c", type=float)
    p.add_argument("--classes")
    p.add_argument("--out")

    p = add("train", cmd_train, "train the pixel classifier on a dataset directory")
    p.add_argument("data")
    p.add_argument("--annotation", choices=ANNOTATION_SUFFIX, default="full")
    p.add_argument("--weights", help="weights JSON from the 'weights' command")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--patch-radius", type=int)
    p.add_argument("--classes")
    p.add_argument("--out", required=True)

    p = add("predict", cmd_predict, "class probabilities and labels for PPM images")
    p.add_argument("images", nargs="+")
    p.add_argument("--classifier", required=True)
    p.add_argument("--out-dir", required=True)

    p = add("metrics", cmd_metrics, "confusion-based IoU, recall and accuracy")
    p.add_argument("--pred", nargs="+", required=True, help="prediction rasters or one directory")
    p.add_argument("--truth", nargs="+", required=True, help="truth rasters or one directory")
    p.add_argument("--mode", choices=("present", "all"), default="present")
    p.add_argument("--classes")
    p.add_argument("--out")

    p = add("ratio-exp", cmd_ratio_exp, "accuracy versus share of fully annotated training images")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--ratios", type=float, nargs="+", default=[0.0, 0.1, 0.2, 1.0])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--patch-radius", type=int)
    p.add_argument("--mode", choices=("present", "all"), default="present")
    p.add_argument("--classes")
    p.add_argument("--out", required=True)

    p = add("synth-log", cmd_synth_log, "simulate wheel interaction logs from a property model")
    p.add_argument("--model", help="property model JSON (default: reference values)")
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--identified", action="store_true",
                   help="write identification rows drawn directly from the class Gaussians")
    p.add_argument("--classes")
    p.add_argument("--out", required=True)

    p = add("identify", cmd_identify, "identify (N, phi) for every sample of an interaction log")
    p.add_argument("log")
    p.add_argument("--smooth", type=float, help="moving-average window in seconds (0 disables)")
    p.add_argument("--out", required=True)

    p = add("fit", cmd_fit, "fit per-class Gaussian property model from an identification report")
    p.add_argument("report")
    p.add_argument("--min-samples", type=int, default=2)
    p.add_argument("--classes")
    p.add_argument("--out", required=True)

    p = add("infer", cmd_infer, "dense property maps from a class probability map")
    p.add_argument("prob")
    p.add_argument("--model", required=True)
    p.add_argument("--classes")
    p.add_argument("--out-dir", required=True)

    p = add("route", cmd_route, "property profile along wheel tracks, with error and coverage")
    p.add_argument("--maps", required=True, help="directory holding N.bin and phi.bin")
    p.add_argument("--route", required=True)
    p.add_argument("--multiplier", type=float, default=1.0)
    p.add_argument("--out", required=True)

    p = add("flags", cmd_flags, "hazard bitmask raster from property maps")
    p.add_argument("--maps", required=True)
    p.add_argument("--N-max", dest="N_max", type=float)
    p.add_argument("--phi-min", type=float)
    p.add_argument("--sigma-N-max", dest="sigma_N_max", type=float)
    p.add_argument("--sigma-phi-max", type=float)
    p.add_argument("--out", required=True)

    p = add("synth-scene", cmd_synth_scene, "analytic ground-plane frame pair for label propagation")
    p.add_argument("--shift", type=float, nargs=3, default=[0.3, 0.05, 0.0])
    p.add_argument("--yaw", type=float, default=3.0)
    p.add_argument("--classes")
    p.add_argument("--out", required=True)

    p = add("propagate", cmd_propagate, "carry labels from one frame to another through depth")
    p.add_argument("--camera")
    p.add_argument("--poses", required=True)
    p.add_argument("--src-frame", required=True)
    p.add_argument("--dst-frame", required=True)
    p.add_argument("--src-labels", required=True)
    p.add_argument("--src-depth", required=True)
    p.add_argument("--dst-depth", required=True)
    p.add_argument("--z-tol", type=float)
    p.add_argument("--truth", help="optional destination labels to score against")
    p.add_argument("--out", required=True)

    p = add("render", cmd_render, "PPM visualisation of a raster")
    p.add_argument("kind", choices=("heatmap", "classes", "overlay"))
    p.add_argument("input")
    p.add_argument("--range", type=float, nargs=2, metavar=("MIN", "MAX"))
    p.add_argument("--channel", type=int, default=0)
    p.add_argument("--colormap", default="ordered")
    p.add_argument("--image", help="base PPM for overlays")
    p.add_argument("--alpha", type=int, default=50, help="overlay opacity in percent")
    p.add_argument("--classes")
    p.add_argument("--out", required=True)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.threads < 1:
        print("error: --threads must be at least 1", file=sys.stderr)
        return 2
    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
        return args.func(args, cfg)
    except DataError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
