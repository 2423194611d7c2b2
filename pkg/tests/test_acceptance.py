"""End-to-end acceptance checks.

Each test prints one ``ACCEPTANCE <n> PASS|FAIL`` line with the measured
numbers, so ``pytest -v tests/test_acceptance.py`` doubles as a report.
Run ``python3 tests/test_acceptance.py`` to print the lines without pytest.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest
from scipy.stats import spearmanr

from terrasight import IGNORE
from terrasight.cli import main as cli_main
from terrasight.inference import (full_scale_error, infer_property_maps, interval_coverage,
                                  mixture_moments)
from terrasight.labeling import DEFAULT_CAMERA, camera_pair, propagate_labels, render_plane
from terrasight.segmentation import (TrainParams, class_proportions, compute_class_weights, confusion,
                                     extract_features, metrics, predict_labels, train_classifier,
                                     train_test_corpus, wce_gradient, weighted_cross_entropy)
from terrasight.terramech import ContactKernel, forward_wheel, identify_from_state, reference_property_model

MODEL = reference_property_model()
CLASSES = list(MODEL.entries)

# criterion 1 / 10 grid: 5 x 5 x 5 x 4 = 500 points
GRID_N = np.linspace(0.3, 2.0, 5)
GRID_PHI = np.linspace(5.0, 50.0, 5)
GRID_S = np.linspace(0.05, 0.9, 5)
GRID_THETA1 = np.linspace(0.1, 0.5, 4)


def report(number, title, ok, detail):
    line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    print(line)
    return line


@pytest.fixture
def say(capsys):
    def _say(*args):
        with capsys.disabled():
            print()
            return report(*args)
    return _say


def _cli(*argv):
    code = cli_main([str(a) for a in argv])
    assert code == 0, f"CLI {argv[0]} exited {code}"


def _cli_summary(capsys, *argv):
    _cli(*argv)
    return json.loads(capsys.readouterr().out.strip().splitlines()[-1])


# ---------------------------------------------------------------- 1

def check_round_trip():
    worst_N = worst_phi = 0.0
    unconverged = 0
    per_sample = []
    t_total = time.perf_counter()
    for N, phi, s, th in itertools.product(GRID_N, GRID_PHI, GRID_S, GRID_THETA1):
        F, M = forward_wheel(N, phi, s, th)
        t0 = time.perf_counter()
        res = identify_from_state(F, M, s, th)
        per_sample.append(time.perf_counter() - t0)
        unconverged += not res.converged
        worst_N = max(worst_N, abs(res.N - N))
        worst_phi = max(worst_phi, abs(res.phi - phi))
    total = time.perf_counter() - t_total
    per_sample = np.array(per_sample)
    ok = (worst_N <= 1e-3 and worst_phi <= 0.01 and unconverged == 0 and total < 30.0
          and per_sample.max() < 0.010)
    detail = (f"{per_sample.size} points, max|dN|={worst_N:.2e}, max|dphi|={worst_phi:.2e} deg, "
              f"unconverged={unconverged}, total {total:.2f} s, per sample mean {1e3 * per_sample.mean():.2f} ms "
              f"max {1e3 * per_sample.max():.2f} ms")
    return ok, detail


def test_1_terramechanics_round_trip(say):
    ok, detail = check_round_trip()
    say(1, "terramechanics round trip", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 2

def _mc_moments(p, mus, sds, n, rng):
    # independent sampler: multinomial component counts, then Gaussian draws per component
    counts = rng.multinomial(n, p)
    x = np.concatenate([rng.normal(m, s, c) for m, s, c in zip(mus, sds, counts)])
    mean = x.mean()
    d2 = (x - mean) ** 2
    var = d2.mean()
    se_mean = math.sqrt(var / n)
    se_var = d2.std() / math.sqrt(n)
    return mean, var, se_mean, se_var


def check_mixture():
    names = [c for c in CLASSES if MODEL.entries[c]["N"].sigma > 0]
    rng = np.random.default_rng(0)
    worst_z = 0.0
    outside = []
    for i in range(100):
        p = rng.dirichlet(np.ones(len(names)))
        for par in ("N", "phi"):
            mus, sds = MODEL.arrays(names, par)
            mu, sd = mixture_moments(p, mus, sds)
            m, v, se_m, se_v = _mc_moments(p, mus, sds, 1_000_000, rng)
            for what, z in (("mean", abs(m - mu) / se_m), ("var", abs(v - sd * sd) / se_v)):
                worst_z = max(worst_z, z)
                if z > 3.0:
                    outside.append(f"vector {i} {par} {what} z={z:.2f}")
    ok_mc = not outside
    mu, sd = mixture_moments([0.5, 0, 0, 0.5, 0, 0], *MODEL.arrays(CLASSES, "N"))
    ok_hand = abs(mu - 0.73) <= 1e-12 and abs(sd - 0.6543) <= 1e-3
    detail = (f"400 moment comparisons, worst |z|={worst_z:.2f}, beyond 3 SE: {outside or 'none'}; "
              f"hand case mu_N={mu!r} sigma_N={sd:.6f}")
    return ok_mc and ok_hand, detail


def test_2_mixture_correctness(say):
    ok, detail = check_mixture()
    say(2, "mixture moments vs Monte Carlo", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 3

def check_property_reconstruction(tmp_path, capsys=None):
    _cli("--seed", 0, "synth-log", "--identified", "--per-class", 1000, "--out", tmp_path / "ident.csv")
    _cli("fit", tmp_path / "ident.csv", "--out", tmp_path / "model.json")
    fitted = json.loads((tmp_path / "model.json").read_text())
    bad, worst_mean, worst_sd = [], 0.0, 0.0
    for c in CLASSES:
        for par in ("N", "phi"):
            ref = MODEL.entries[c][par]
            got = fitted[c][par]
            tol = 3 * ref.sigma / math.sqrt(1000)
            dm = abs(got["mu"] - ref.mu)
            ds = abs(got["sigma"] - ref.sigma)
            worst_mean = max(worst_mean, dm / tol if tol else (0.0 if dm == 0 else math.inf))
            worst_sd = max(worst_sd, ds / ref.sigma if ref.sigma else (0.0 if ds == 0 else math.inf))
            if dm > tol or ds > 0.1 * ref.sigma:
                bad.append(f"{c}/{par}: mu {got['mu']:.4f} sigma {got['sigma']:.4f}")
    detail = (f"{len(CLASSES)} classes x 1000 samples; worst mean error {worst_mean:.2f} of the 3-sigma/sqrt(n) "
              f"band, worst sigma error {100 * worst_sd:.1f}%; failures: {bad or 'none'}")
    return not bad, detail


def test_3_property_model_reconstruction(tmp_path, say, capsys):
    ok, detail = check_property_reconstruction(tmp_path)
    capsys.readouterr()
    say(3, "property model reconstruction via fit", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 4

def check_loss_gradient():
    rng = np.random.default_rng(0)
    h = 1e-4
    worst = 0.0
    for _ in range(50):
        z = rng.normal(size=(4, 4, 3)) * 2.0
        labels = rng.integers(0, 3, (4, 4)).astype(np.uint8)
        labels[rng.random((4, 4)) < 0.15] = IGNORE
        labels[0, 0] = rng.integers(0, 3)
        w = rng.dirichlet(np.ones(3))
        g = wce_gradient(z, labels, w)
        fd = np.zeros_like(z)
        for idx in np.ndindex(z.shape):
            zp, zm = z.copy(), z.copy()
            zp[idx] += h
            zm[idx] -= h
            fd[idx] = (weighted_cross_entropy(zp, labels, w) - weighted_cross_entropy(zm, labels, w)) / (2 * h)
        worst = max(worst, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    labels = rng.integers(0, 3, (4, 4)).astype(np.uint8)
    logits = np.full((4, 4, 3), -50.0)
    np.put_along_axis(logits, labels[..., None].astype(int), 50.0, axis=2)
    loss_1 = weighted_cross_entropy(logits, labels, np.full(3, 1 / 3))
    eq = compute_class_weights(np.full(6, 1 / 6))
    two = compute_class_weights([0.9, 0.1], 1.1)
    ok = (worst <= 1e-5 and loss_1 < 1e-9 and np.abs(eq - 1 / 6).max() <= 1e-12
          and np.abs(two - [0.2083, 0.7917]).max() <= 1e-4)
    detail = (f"worst relative gradient error {worst:.2e} over 50 instances, loss at certainty {loss_1:.1e}, "
              f"equal-proportion weights off by {np.abs(eq - 1 / 6).max():.1e}, (0.9, 0.1) -> "
              f"({two[0]:.6f}, {two[1]:.6f})")
    return ok, detail


def test_4_loss_and_gradient(say):
    ok, detail = check_loss_gradient()
    say(4, "weighted cross-entropy and gradient", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 5

def check_segmentation():
    train, test = train_test_corpus(20, 10, seed=0, size=128)
    t0 = time.perf_counter()
    feats = [extract_features(s.image) for s in train]
    labels = [s.labels for s in train]
    beta = compute_class_weights(class_proportions(labels, 6), 1.1)
    clf = train_classifier(feats, labels, beta, TrainParams(seed=0))
    t_train = time.perf_counter() - t0
    cm = np.zeros((6, 6), dtype=np.int64)
    for s in test:
        cm += confusion(predict_labels(clf, extract_features(s.image)), s.labels, 6)
    m = metrics(cm)
    recall = m["per_class_recall"]
    ok = m["pixel_accuracy"] >= 0.90 and np.nanmin(recall) >= 0.80 and not np.isnan(recall).any() and t_train < 60
    detail = (f"accuracy {m['pixel_accuracy']:.4f}, mIoU {m['mIoU']:.4f}, recall "
              f"[{', '.join(f'{r:.3f}' for r in recall)}], training {t_train:.1f} s")
    return ok, detail


def test_5_synthetic_segmentation(say):
    ok, detail = check_segmentation()
    say(5, "synthetic segmentation", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 6

def check_ratio(tmp_path):
    _cli("--seed", 0, "synth-corpus", "--n-train", 20, "--n-test", 10, "--size", 128, "--out", tmp_path / "corpus")
    _cli("--seed", 0, "ratio-exp", "--train", tmp_path / "corpus" / "train", "--test", tmp_path / "corpus" / "test",
         "--ratios", 0, 0.1, 0.2, 1.0, "--out", tmp_path / "ratio.csv")
    import csv
    with open(tmp_path / "ratio.csv") as fh:
        rows = list(csv.DictReader(fh))
    ratios = [float(r["ratio"]) for r in rows]
    acc = [float(r["accuracy"]) for r in rows]
    rho = spearmanr(ratios, acc)[0]
    ok = len(rows) == 4 and not math.isnan(rho) and rho >= 0
    detail = f"accuracy by ratio {dict(zip(ratios, (round(a, 4) for a in acc)))}, Spearman {rho:.3f}"
    return ok, detail


def test_6_annotation_ratio_trend(tmp_path, say, capsys):
    ok, detail = check_ratio(tmp_path)
    capsys.readouterr()
    say(6, "annotation ratio experiment", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 7

def check_throughput():
    rng = np.random.default_rng(0)
    prob = rng.dirichlet(np.ones(6), size=(540, 960)).astype(np.float32)
    prob /= prob.sum(axis=2, keepdims=True)
    infer_property_maps(prob, MODEL, CLASSES)          # warm-up
    times = []
    for _ in range(7):
        t0 = time.perf_counter()
        single = infer_property_maps(prob, MODEL, CLASSES, threads=1)
        times.append(time.perf_counter() - t0)
    median = float(np.median(times))
    identical = True
    for threads in (2, 4, 7):
        multi = infer_property_maps(prob, MODEL, CLASSES, threads=threads)
        identical &= all(single[p].mean.tobytes() == multi[p].mean.tobytes()
                         and single[p].std.tobytes() == multi[p].std.tobytes() for p in single)
    ok = median < 0.050 and identical
    detail = (f"540x960x6 single-threaded median {1e3 * median:.1f} ms (min {1e3 * min(times):.1f}, "
              f"max {1e3 * max(times):.1f}); 2/4/7 threads bit-identical: {identical}")
    return ok, detail


def test_7_inference_throughput(say):
    ok, detail = check_throughput()
    say(7, "dense inference throughput", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 8

def check_propagation():
    src, dst = camera_pair((0.3, 0.05, 0.0), 3.0)
    d_src, l_src = render_plane(DEFAULT_CAMERA, src)
    d_dst, l_dst = render_plane(DEFAULT_CAMERA, dst)
    out, stats = propagate_labels(l_src, d_src, src, dst, d_dst, DEFAULT_CAMERA)
    valid = (out != IGNORE) & (l_dst != IGNORE)
    match = float((out[valid] == l_dst[valid]).mean())
    same, _ = propagate_labels(l_src, d_src, src, src, d_src, DEFAULT_CAMERA)
    keep = (l_src != IGNORE) & (d_src > 0)
    exact = bool(np.array_equal(same[keep], l_src[keep]))
    ok = match >= 0.99 and exact
    detail = (f"moved camera: {match:.5f} of {int(valid.sum())} compared pixels match the analytic render; "
              f"identity pose exact on {int(keep.sum())} pixels: {exact}")
    return ok, detail


def test_8_label_propagation(say):
    ok, detail = check_propagation()
    say(8, "label propagation", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 9

def check_route_metrics():
    # hand-evaluated 5-point route
    mu = np.array([1.0, 1.2, 0.8, 0.5, 1.5])
    sd = np.array([0.15, 0.3, 0.1, 0.25, 0.45])
    truth = np.array([1.1, 1.0, 0.8, 0.9, 1.0])
    fse = full_scale_error(mu, truth, 2.0)          # mean |d| = 0.24 -> 12 %
    cov = interval_coverage(mu, sd, truth, 1.0)     # 3 of 5 inside
    hand_ok = abs(fse - 12.0) <= 1e-12 and cov == 0.6
    rng = np.random.default_rng(0)
    m = rng.uniform(0.0, 2.0, 100_000)
    s = rng.uniform(0.05, 0.5, 100_000)
    big = interval_coverage(m, s, rng.normal(m, s), 1.0)
    ok = hand_ok and abs(big - 0.6827) <= 0.01
    return ok, f"5-point fse {fse!r}% coverage {cov!r}; 1e5 Normal points coverage {big:.4f}"


def test_9_route_metrics(say):
    ok, detail = check_route_metrics()
    say(9, "route error and coverage metrics", ok, detail)
    assert ok, detail


# ---------------------------------------------------------------- 10

def check_forward_numerics():
    F1, M1 = forward_wheel(1.36, 29.6, 0.2, 0.3, quadrature_n=200)
    F2, M2 = forward_wheel(1.36, 29.6, 0.2, 0.3, quadrature_n=400)
    rel = max(abs(F1 - F2) / abs(F2), abs(M1 - M2) / abs(M2))
    violations = 0
    checks = 0
    for s, th in itertools.product(GRID_S, GRID_THETA1):
        k = ContactKernel(s, th)
        table = np.array([[k.forces(N, phi) for phi in GRID_PHI] for N in GRID_N])   # N x phi x (F, M)
        F, M = table[..., 0], table[..., 1]
        violations += int((np.diff(F, axis=0) >= 0).sum()) + int((np.diff(M, axis=1) <= 0).sum())
        checks += np.diff(F, axis=0).size + np.diff(M, axis=1).size
        # local sense at every grid point
        for i, N in enumerate(GRID_N):
            for j, phi in enumerate(GRID_PHI):
                violations += k.forces(N + 1e-4, phi)[0] >= F[i, j]
                violations += k.forces(N, phi + 1e-3)[1] <= M[i, j]
                checks += 2
    ok = rel < 1e-6 and violations == 0
    return ok, f"n vs 2n relative difference {rel:.2e}; monotonicity violations {violations} of {checks} checks"


def test_10_forward_numerics(say):
    ok, detail = check_forward_numerics()
    say(10, "forward-model numerics", ok, detail)
    assert ok, detail


if __name__ == "__main__":
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as d:
        d = Path(d)
        (d / "3").mkdir()
        (d / "6").mkdir()
        checks = [(1, "terramechanics round trip", check_round_trip),
                  (2, "mixture moments vs Monte Carlo", check_mixture),
                  (3, "property model reconstruction via fit", lambda: check_property_reconstruction(d / "3")),
                  (4, "weighted cross-entropy and gradient", check_loss_gradient),
                  (5, "synthetic segmentation", check_segmentation),
                  (6, "annotation ratio experiment", lambda: check_ratio(d / "6")),
                  (7, "dense inference throughput", check_throughput),
                  (8, "label propagation", check_propagation),
                  (9, "route error and coverage metrics", check_route_metrics),
                  (10, "forward-model numerics", check_forward_numerics)]
        lines = []
        for n, title, fn in checks:
            import contextlib
            import io
            with contextlib.redirect_stdout(io.StringIO()):
                ok, detail = fn()
            lines.append(report(n, title, ok, detail))
