import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from terrasight.errors import DataError
from terrasight.terramech import (Gaussian, IdentifiedProperties, TerrainPropertyModel, fit_property_model,
                                  reference_property_model, untraversable_defaults)
from terrasight.terramech.logs import downsample, smooth_log, synthetic_log
from terrasight.terramech.identify import InteractionSample


def _results(label, Ns, phis, converged=True):
    return [IdentifiedProperties(N=n, phi=p, s=0.2, theta1=0.3, converged=converged, label=label)
            for n, p in zip(Ns, phis)]


def test_reference_values():
    m = reference_property_model()
    rows = {c: (e["N"].mu, e["N"].sigma, e["phi"].mu, e["phi"].sigma) for c, e in m.entries.items()}
    assert rows == {
        "soil": (1.36, 0.25, 29.6, 8.9), "stony soil": (1.28, 0.32, 36.9, 8.6),
        "gravel": (0.92, 0.27, 36.5, 12.4), "bedrock": (0.10, 0.01, 47.3, 18.7),
        "rock": (0.10, 0.01, 47.3, 18.7), "background": (0.0, 0.0, 0.0, 0.0)}


def test_constant_samples():
    m = fit_property_model(_results("soil", [0.7] * 5, [31.0] * 5), ["soil"])
    assert m.entries["soil"]["N"].mu == 0.7 and m.entries["soil"]["N"].sigma == 0.0


def test_two_sample_mle():
    m = fit_property_model(_results("soil", [1.0, 3.0], [10.0, 20.0]), ["soil"])
    g = m.entries["soil"]["N"]
    assert (g.mu, g.sigma, g.n) == (2.0, 1.0, 2)
    assert m.entries["soil"]["phi"].sigma == 5.0


def test_sampling_oracle_soil():
    rng = np.random.default_rng(3)
    Ns = rng.normal(1.36, 0.25, 1000)
    m = fit_property_model(_results("soil", Ns, np.full(1000, 30.0)), ["soil"])
    assert abs(m.entries["soil"]["N"].mu - 1.36) <= 3 * 0.25 / np.sqrt(1000)
    assert m.entries["soil"]["N"].sigma == pytest.approx(np.std(Ns), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.05, 2.5), min_size=2, max_size=40), st.randoms())
def test_fit_is_order_independent(values, rnd):
    shuffled = values[:]
    rnd.shuffle(shuffled)
    a = fit_property_model(_results("gravel", values, values), ["gravel"])
    b = fit_property_model(_results("gravel", shuffled, shuffled), ["gravel"])
    assert a.to_dict() == b.to_dict()


def test_unconverged_and_unlabelled_ignored():
    res = _results("soil", [1.0, 3.0], [1, 1]) + _results("soil", [100.0], [1], converged=False)
    res += [IdentifiedProperties(N=9.0, phi=9.0, s=0.1, theta1=0.1, converged=True, label=None)]
    assert fit_property_model(res, ["soil"]).entries["soil"]["N"].mu == 2.0


def test_short_class_without_default_names_it():
    with pytest.raises(DataError, match="gravel"):
        fit_property_model(_results("soil", [1, 2], [1, 2]), ["soil", "gravel"])


def test_unknown_label():
    with pytest.raises(DataError, match="mud"):
        fit_property_model(_results("mud", [1, 2], [1, 2]), ["soil"])


def test_untraversable_defaults():
    d = untraversable_defaults(["soil", "bedrock", "rock", "background"])
    r = d.entries["rock"]
    assert (r["N"].mu, r["N"].sigma, r["phi"].mu, r["phi"].sigma) == (0.10, 0.01, 47.3, 18.7)
    assert all(g.mu == 0 and g.sigma == 0 for g in d.entries["background"].values())
    assert untraversable_defaults(["soil", "gravel"]).entries == {}


def test_defaults_fill_missing_classes():
    res = _results("soil", [1, 2], [1, 2])
    m = fit_property_model(res, ["soil", "rock"], untraversable_defaults(["rock"]))
    assert m.entries["rock"]["phi"].mu == 47.3


def test_dict_round_trip_and_digest():
    m = reference_property_model()
    again = TerrainPropertyModel.from_dict(m.to_dict())
    assert again.to_dict() == m.to_dict() and again.digest() == m.digest()
    assert len(m.digest()) == 16


def test_negative_sigma_rejected():
    with pytest.raises(DataError):
        Gaussian(1.0, -0.1)


class TestLogs:
    def _log(self, values, dt=0.01):
        return [InteractionSample(t=i * dt, F_N=v, M_R=2 * v, omega=2.0, v=0.2, z=0.005, label="soil")
                for i, v in enumerate(values)]

    def test_constant_signal_unchanged(self):
        out = smooth_log(self._log([5.0] * 50), 0.1)
        assert all(s.F_N == pytest.approx(5.0, rel=1e-15) for s in out)

    def test_window_average(self):
        out = smooth_log(self._log(np.arange(10.0)), 0.021)   # +-1 sample
        assert out[5].F_N == pytest.approx(5.0) and out[0].F_N == pytest.approx(0.5)
        assert out[5].M_R == pytest.approx(10.0) and out[5].label == "soil"

    def test_disabled(self):
        vals = np.random.default_rng(0).normal(size=20)
        out = smooth_log(self._log(vals), 0.0)
        assert [s.F_N for s in out] == list(vals)

    def test_unsorted_rejected(self):
        log = self._log([1.0, 2.0, 3.0])
        log[1].t = 5.0
        with pytest.raises(ValueError):
            smooth_log(log, 0.1)

    def test_downsample(self):
        out = downsample(self._log(np.arange(100.0)), 0.1)
        assert len(out) == 10 and out[1].F_N == 10.0

    def test_synthetic_log_is_reproducible_and_skips_background(self):
        m = reference_property_model()
        names = list(m.entries)
        a = synthetic_log(m, names, 3, np.random.default_rng(1))
        b = synthetic_log(m, names, 3, np.random.default_rng(1))
        assert [vars(s) for s in a] == [vars(s) for s in b]
        assert len(a) == 15 and all(s.label != "background" for s in a)
