import math
from dataclasses import replace

import numpy as np
import pytest

from linklab import analytic as A
from linklab.analytic import MetricKind
from linklab.linkmodel import AdaptiveGain, make_config
from linklab.mcsim import (
    CombiningMode,
    McOptions,
    chunk_rng,
    run_ber_mc,
    run_mc,
    run_outage_mc,
)

ADAPTIVE = AdaptiveGain()


class TestOptions:
    @pytest.mark.parametrize("kw", [{"trials": 0}, {"chunk_size": 0}, {"workers": 0},
                                    {"trials": 1.5}, {"master_seed": -1}, {"master_seed": 2**64}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            McOptions(**kw)

    def test_combining_from_string(self):
        assert McOptions(combining_mode="min").combining_mode is CombiningMode.MIN_APPROX


class TestExamples:
    def test_zero_threshold(self):
        cfg = replace(make_config("negexp-l1", 10.0), gamma_th=0.0)
        est = run_outage_mc(cfg, McOptions(trials=50_000))
        assert est.estimate == 0.0 and est.std_error == 0.0

    def test_huge_threshold(self):
        cfg = replace(make_config("negexp-l1", 10.0), gamma_th=1e12)
        assert run_outage_mc(cfg, McOptions(trials=50_000)).estimate == 1.0

    def test_outage_fixed_ne(self):
        cfg = make_config("negexp-l1", 30.0)
        est = run_outage_mc(cfg, McOptions(trials=10_000_000, master_seed=31))
        assert est.metric_kind is MetricKind.OUTAGE
        assert abs(est.estimate - A.outage_fixed_ne(cfg)) < 3 * est.std_error

    def test_degenerate_channel(self):
        cfg = make_config("moderate-gg", -90.0)
        assert run_ber_mc(cfg, McOptions(trials=100_000)).estimate == pytest.approx(0.5, abs=1e-4)

    def test_injected_snr(self):
        cfg = make_config("moderate-gg", 10.0)
        est = run_ber_mc(cfg, McOptions(trials=10_000, chunk_size=999),
                         end_snr_fn=lambda gf, gr: 2.0)
        assert est.estimate == 0.5 * math.exp(-2.0)
        assert est.std_error == pytest.approx(0.0, abs=1e-15)

    def test_ber_adaptive_gg(self):
        cfg = make_config("moderate-gg", 30.0, relay=ADAPTIVE)
        est = run_ber_mc(cfg, McOptions(trials=10_000_000, master_seed=32,
                                        combining_mode=CombiningMode.MIN_APPROX))
        assert est.metric_kind is MetricKind.BER
        assert abs(est.estimate - A.ber_adaptive_gg(cfg)) < 3 * est.std_error


def test_standard_error_bound():
    for cfg in (make_config("strong-gg", 10.0), make_config("negexp-l1", 20.0, relay=ADAPTIVE)):
        for est in run_mc(cfg, McOptions(trials=40_000)):
            assert 0.0 <= est.estimate <= 1.0
            assert est.std_error <= 0.5 / math.sqrt(est.trials) * 2


def test_determinism_across_workers():
    cfg = make_config("strong-gg", 20.0, relay=ADAPTIVE)
    base = McOptions(trials=300_000, chunk_size=16_384, master_seed=123)
    ref = run_mc(cfg, base)
    for w in (4, 16):
        assert run_mc(cfg, replace(base, workers=w)) == ref


def test_chunks_are_independent_streams():
    a = chunk_rng(5, 0).random(4)
    b = chunk_rng(5, 1).random(4)
    assert not np.array_equal(a, b)
    assert np.array_equal(a, chunk_rng(5, 0).random(4))


def test_seed_changes_result():
    cfg = make_config("moderate-gg", 10.0)
    a = run_outage_mc(cfg, McOptions(trials=20_000, master_seed=1))
    b = run_outage_mc(cfg, McOptions(trials=20_000, master_seed=2))
    assert a.estimate != b.estimate


def test_standard_error_scaling():
    cfg = make_config("negexp-l1", 20.0)
    for k in range(2):
        e1 = run_mc(cfg, McOptions(trials=200_000, master_seed=40 + k))
        e2 = run_mc(cfg, McOptions(trials=400_000, master_seed=40 + k))
        for a, b in zip(e1, e2):
            assert a.std_error / b.std_error == pytest.approx(math.sqrt(2.0), rel=0.10)


@pytest.mark.parametrize("regime", ["moderate-gg", "negexp-l1"])
def test_exact_combiner_is_worse(regime):
    for db in (0.0, 10.0, 20.0, 30.0, 40.0):
        cfg = make_config(regime, db, relay=ADAPTIVE)
        opts = McOptions(trials=100_000, master_seed=9)
        ex = run_outage_mc(cfg, opts)
        mn = run_outage_mc(cfg, replace(opts, combining_mode=CombiningMode.MIN_APPROX))
        assert ex.estimate >= mn.estimate


def test_combining_mode_ignored_for_fixed_gain():
    cfg = make_config("moderate-gg", 20.0)
    opts = McOptions(trials=50_000)
    assert run_mc(cfg, opts) == run_mc(cfg, replace(opts, combining_mode=CombiningMode.MIN_APPROX))


def test_coverage():
    cfg = make_config("negexp-l1", 20.0)
    truth = A.outage_quadrature(cfg)
    hits = 0
    for seed in range(100):
        est = run_outage_mc(cfg, McOptions(trials=20_000, master_seed=1000 + seed))
        hits += abs(est.estimate - truth) <= est.ci_half_width
    assert hits >= 92
