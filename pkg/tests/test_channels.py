import math

import numpy as np
import pytest
from scipy import integrate

from linklab.channels import (
    GammaGammaPointing,
    NegExpTurbulence,
    RayleighRf,
    TurbulenceModel,
    ccdf_snr,
    cdf_snr,
    db_to_linear,
    linear_to_db,
    pdf_snr,
    pointing_xi,
    rytov_to_gg_params,
    sample_snr,
)
from conftest import KS_C01, ks_statistic

MOD = GammaGammaPointing(4.0, 1.9, 10.45)
STRONG = GammaGammaPointing(4.2, 1.4, 2.45)

# mpmath.meijerg at 30 digits
GG_CDF_MOD_1_10 = 0.211409009620759499064321348189
GG_CDF_STRONG_10_100 = 0.263963293839093517317143070006
# printed scintillation mapping at unit Rytov variance, 30 digits
RYTOV1_ALPHA = 3.8254573676069039882795160417
RYTOV1_BETA = 2.83883533213786187451462072104

MODELS = [
    RayleighRf(3.0),
    TurbulenceModel(NegExpTurbulence(1.0), 3.0),
    TurbulenceModel(NegExpTurbulence(5.0), 3.0),
    TurbulenceModel(MOD, 3.0),
    TurbulenceModel(STRONG, 3.0),
]


def _mean(model):
    return model.mean_snr


class TestExamples:
    def test_rayleigh_pdf_at_zero(self):
        assert pdf_snr(RayleighRf(2.0), 0.0) == pytest.approx(0.5, rel=1e-15)

    def test_negexp_pdf(self):
        m = TurbulenceModel(NegExpTurbulence(1.0), 1.0)
        assert pdf_snr(m, 1.0) == pytest.approx(0.5 * math.exp(-1.0), rel=1e-14)

    def test_rayleigh_cdf(self):
        assert cdf_snr(RayleighRf(7.0), 7.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    def test_negexp_cdf(self):
        m = TurbulenceModel(NegExpTurbulence(1.0), 7.0)
        assert cdf_snr(m, 7.0) == pytest.approx(1 - math.exp(-1), rel=1e-14)

    def test_gg_cdf_frozen(self):
        assert cdf_snr(TurbulenceModel(MOD, 10.0), 1.0) == pytest.approx(GG_CDF_MOD_1_10, rel=1e-10)
        assert cdf_snr(TurbulenceModel(STRONG, 100.0), 10.0) == pytest.approx(
            GG_CDF_STRONG_10_100, rel=1e-10)

    def test_gg_pdf_matches_cdf_difference(self):
        m = TurbulenceModel(MOD, 10.0)
        h = 1e-3
        fd = (cdf_snr(m, 10.0 + h) - cdf_snr(m, 10.0 - h)) / (2 * h)
        assert abs(pdf_snr(m, 10.0) - fd) < 1e-6

    def test_gg_cdf_vs_simulation(self):
        m = TurbulenceModel(STRONG, 100.0)
        n = 10_000_000
        rng = np.random.default_rng(11)
        hits = sum(int(np.count_nonzero(sample_snr(m, rng, n // 10) <= 10.0)) for _ in range(10))
        p = hits / n
        se = math.sqrt(p * (1 - p) / n)
        assert abs(p - cdf_snr(m, 10.0)) < 3 * se

    def test_negexp_sampler_probability(self):
        m = TurbulenceModel(NegExpTurbulence(1.0), 1.0)
        x = sample_snr(m, np.random.default_rng(3), 1_000_000)
        p = np.mean(x <= 1.0)
        assert abs(p - (1 - math.exp(-1))) < 3 * math.sqrt(p * (1 - p) / x.size)

    def test_gg_sampler_unit_mean_amplitude(self):
        m = TurbulenceModel(MOD, 1.0)
        u = np.sqrt(sample_snr(m, np.random.default_rng(4), 1_000_000))
        assert abs(u.mean() - 1.0) < 3 * u.std() / math.sqrt(u.size)


class TestDomain:
    @pytest.mark.parametrize("model", MODELS)
    def test_negative_gamma(self, model):
        for f in (pdf_snr, cdf_snr, ccdf_snr):
            with pytest.raises(ValueError):
                f(model, -1.0)

    @pytest.mark.parametrize("bad", [0.0, -1.0, math.nan, math.inf])
    def test_parameters(self, bad):
        with pytest.raises(ValueError):
            RayleighRf(bad)
        with pytest.raises(ValueError):
            NegExpTurbulence(bad)
        with pytest.raises(ValueError):
            GammaGammaPointing(bad, 1.0, 1.0)

    def test_default_kappa(self):
        assert MOD.kappa == pytest.approx(10.45**2 / (1 + 10.45**2), rel=1e-15)
        assert GammaGammaPointing(4.0, 1.9, 10.45, kappa=0.5).kappa == 0.5

    def test_db_round_trip(self):
        assert float(db_to_linear(30.0)) == pytest.approx(1000.0, rel=1e-15)
        assert float(linear_to_db(db_to_linear(17.3))) == pytest.approx(17.3, rel=1e-14)


@pytest.mark.parametrize("model", MODELS)
def test_cdf_monotone_and_bounded(model):
    g = np.geomspace(0.01, 100.0, 400) * _mean(model)
    f = cdf_snr(model, g)
    assert np.all(np.diff(f) >= -1e-14)
    assert np.all((f >= 0.0) & (f <= 1.0))
    assert cdf_snr(model, 0.0) == 0.0
    assert cdf_snr(model, 1e12 * _mean(model)) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("model", MODELS)
def test_pdf_integrates_to_cdf(model):
    gb = _mean(model)

    # integrate in u = ln(g / gb) to resolve the origin
    def f(u):
        g = gb * math.exp(u)
        return pdf_snr(model, g) * g

    val, _ = integrate.quad(f, math.log(1e-24), math.log(1000.0), limit=400,
                            epsabs=1e-12, epsrel=1e-12)
    assert abs(val - cdf_snr(model, 1000.0 * gb)) < 1e-6


@pytest.mark.parametrize("model", MODELS)
@pytest.mark.parametrize("x", [0.05, 0.5, 2.0, 20.0])
def test_pdf_is_cdf_derivative(model, x):
    g = x * _mean(model)
    h = 1e-4 * g
    fd = (cdf_snr(model, g + h) - cdf_snr(model, g - h)) / (2 * h)
    assert abs(pdf_snr(model, g) - fd) <= 1e-5 * pdf_snr(model, g)


@pytest.mark.parametrize("model", MODELS)
def test_ccdf_complements_cdf(model):
    g = np.geomspace(0.01, 100.0, 50) * _mean(model)
    assert np.allclose(ccdf_snr(model, g) + cdf_snr(model, g), 1.0, atol=1e-13, rtol=0)


@pytest.mark.parametrize("model", [RayleighRf(1.0), TurbulenceModel(NegExpTurbulence(1.0), 1.0),
                                   TurbulenceModel(STRONG, 1.0)])
def test_sampler_ks(model):
    n = 1_000_000
    x = sample_snr(model, np.random.default_rng(2024), n)
    d, interp_err = ks_statistic(x, lambda g: cdf_snr(model, g))
    assert interp_err < 1e-5
    assert d * math.sqrt(n) < KS_C01


@pytest.mark.parametrize("params", [MOD, STRONG])
def test_gg_cdf_vs_simulation_at_deciles(params):
    m = TurbulenceModel(params, 1.0)
    n = 1_000_000
    x = np.sort(sample_snr(m, np.random.default_rng(99), n))
    q = x[np.arange(1, 10) * n // 10]
    emp = np.searchsorted(x, q, side="right") / n
    se = np.sqrt(emp * (1 - emp) / n)
    assert np.all(np.abs(emp - cdf_snr(m, q)) < 3 * se + 1.0 / n)


def test_sampler_reproducible():
    m = TurbulenceModel(MOD, 2.0)
    a = sample_snr(m, np.random.default_rng(5), 100)
    b = sample_snr(m, np.random.default_rng(5), 100)
    assert np.array_equal(a, b)


class TestRytov:
    def test_frozen_unit(self):
        a, b = rytov_to_gg_params(1.0)
        assert a == pytest.approx(RYTOV1_ALPHA, rel=1e-13)
        assert b == pytest.approx(RYTOV1_BETA, rel=1e-13)

    def test_weak_limit(self):
        a, b = rytov_to_gg_params(1e-3)
        assert a > 1e3 and b > 1e3

    def test_monotone(self):
        assert rytov_to_gg_params(0.5)[0] > rytov_to_gg_params(2.0)[0]

    @pytest.mark.parametrize("bad", [0.0, -0.1, math.nan])
    def test_domain(self, bad):
        with pytest.raises(ValueError):
            rytov_to_gg_params(bad)


class TestPointing:
    def test_moderate(self):
        assert pointing_xi(20.9, 1.0) == pytest.approx(10.45, rel=1e-15)

    def test_strong(self):
        assert pointing_xi(4.9, 1.0) == pytest.approx(2.45, rel=1e-15)

    def test_definition(self):
        assert pointing_xi(2 * 0.37, 0.37) == pytest.approx(1.0, rel=1e-15)

    @pytest.mark.parametrize("args", [(0.0, 1.0), (1.0, 0.0), (-1.0, 1.0)])
    def test_domain(self, args):
        with pytest.raises(ValueError):
            pointing_xi(*args)
