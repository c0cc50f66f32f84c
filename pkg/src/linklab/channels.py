"""Per-link SNR statistics: Rayleigh RF, Gamma-Gamma with pointing errors, and
Negative-Exponential FSO.

All SNR quantities are linear.  ``db_to_linear`` / ``linear_to_db`` are for
module boundaries only.

For the Negative-Exponential model the FSO mean-scale ``mean_snr`` is a
*scale* parameter: ``F(g) = 1 - exp(-lam * sqrt(g / mean_snr))`` gives
``E[g] = 2 * mean_snr / lam**2``, not ``mean_snr``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import special

from .specfun import meijer_g_array

__all__ = [
    "GammaGammaPointing",
    "NegExpTurbulence",
    "RayleighRf",
    "TurbulenceModel",
    "pdf_snr",
    "cdf_snr",
    "ccdf_snr",
    "sample_snr",
    "rytov_to_gg_params",
    "pointing_xi",
    "db_to_linear",
    "linear_to_db",
]

# absolute accuracy requested from the Meijer-G layer for probabilities
_PROB_ATOL = 1e-14


def _positive(name, value):
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be finite and positive, got {value!r}")
    return value


@dataclass(frozen=True)
class GammaGammaPointing:
    """Gamma-Gamma scintillation combined with zero-boresight pointing errors.

    ``kappa`` defaults to ``xi**2 / (1 + xi**2)``, the mean of the pointing
    attenuation, which makes the normalised irradiance unit-mean.
    """

    alpha: float
    beta: float
    xi: float
    kappa: float | None = None

    def __post_init__(self):
        for name in ("alpha", "beta", "xi"):
            object.__setattr__(self, name, _positive(name, getattr(self, name)))
        if self.kappa is None:
            object.__setattr__(self, "kappa", self.xi**2 / (1.0 + self.xi**2))
        else:
            object.__setattr__(self, "kappa", _positive("kappa", self.kappa))

    @property
    def xi2(self) -> float:
        return self.xi * self.xi

    @property
    def log_norm(self) -> float:
        """log of xi^2 / (Gamma(alpha) Gamma(beta))."""
        return 2.0 * math.log(self.xi) - math.lgamma(self.alpha) - math.lgamma(self.beta)


@dataclass(frozen=True)
class NegExpTurbulence:
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "lam", _positive("lam", self.lam))


@dataclass(frozen=True)
class RayleighRf:
    mean_snr: float

    def __post_init__(self):
        object.__setattr__(self, "mean_snr", _positive("mean_snr", self.mean_snr))


@dataclass(frozen=True)
class TurbulenceModel:
    """FSO hop: turbulence parameters plus the mean-scale SNR ``mean_snr``."""

    params: Union[GammaGammaPointing, NegExpTurbulence]
    mean_snr: float = field(default=1.0)

    def __post_init__(self):
        if not isinstance(self.params, (GammaGammaPointing, NegExpTurbulence)):
            raise TypeError(f"unsupported turbulence parameters {self.params!r}")
        object.__setattr__(self, "mean_snr", _positive("mean_snr", self.mean_snr))

    @property
    def is_gamma_gamma(self) -> bool:
        return isinstance(self.params, GammaGammaPointing)


Model = Union[TurbulenceModel, RayleighRf]


def db_to_linear(db):
    return np.power(10.0, np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


def _as_snr(gamma):
    g = np.asarray(gamma, dtype=float)
    if np.any(np.isnan(g)) or np.any(g < 0.0):
        raise ValueError("SNR argument must be non-negative")
    return g


def _scalar_or_array(out, like):
    return float(out) if np.ndim(like) == 0 else out


# -- Gamma-Gamma with pointing errors ---------------------------------------


def _gg_arg(gg: GammaGammaPointing, g, mean_snr):
    return gg.alpha * gg.beta * gg.kappa * np.sqrt(g / mean_snr)


def _gg_tail_negligible(gg: GammaGammaPointing, z):
    """Chernoff bound on P(Z > z), Z = alpha*beta*X*Y*V, below 1e-17."""
    s = np.linspace(0.5, 400.0, 800)
    log_mgf = (special.gammaln(gg.alpha + s) + special.gammaln(gg.beta + s)
               - math.lgamma(gg.alpha) - math.lgamma(gg.beta)
               + np.log(gg.xi2 / (gg.xi2 + s)))
    with np.errstate(divide="ignore"):
        lz = np.log(z)
    bound = np.min(log_mgf[None, :] - s[None, :] * lz[:, None], axis=1)
    return bound < math.log(1e-17)


def _gg_cdf(gg: GammaGammaPointing, g, mean_snr):
    out = np.zeros_like(g)
    pos = g > 0.0
    if not pos.any():
        return out
    z = _gg_arg(gg, g[pos], mean_snr)
    res = np.ones_like(z)
    live = ~_gg_tail_negligible(gg, z)
    if live.any():
        norm = math.exp(gg.log_norm)
        G = meijer_g_array(3, 1, (1.0, gg.xi2 + 1.0), (gg.xi2, gg.alpha, gg.beta, 0.0),
                           z[live], atol=_PROB_ATOL / norm)
        res[live] = norm * G
    out[pos] = np.clip(res, 0.0, 1.0)
    return out


def _gg_pdf(gg: GammaGammaPointing, g, mean_snr):
    out = np.empty_like(g)
    zero = g == 0.0
    if zero.any():
        # f ~ g^(min(xi^2, alpha, beta)/2 - 1) near the origin
        lead = min(gg.xi2, gg.alpha, gg.beta) / 2.0 - 1.0
        out[zero] = 0.0 if lead > 0 else math.inf
    pos = ~zero
    if pos.any():
        gp = g[pos]
        z = _gg_arg(gg, gp, mean_snr)
        res = np.zeros_like(z)
        live = ~_gg_tail_negligible(gg, z)
        if live.any():
            norm = math.exp(gg.log_norm)
            G = meijer_g_array(3, 0, (gg.xi2 + 1.0,), (gg.xi2, gg.alpha, gg.beta), z[live],
                               atol=1e-3 * _PROB_ATOL / norm)
            res[live] = norm * G / (2.0 * gp[live])
        out[pos] = np.maximum(res, 0.0)
    return out


# -- public distribution functions ------------------------------------------


def cdf_snr(model: Model, gamma):
    """Cumulative distribution of the instantaneous SNR of one link."""
    g = _as_snr(gamma)
    ga = np.atleast_1d(g).astype(float)
    if isinstance(model, RayleighRf):
        out = -np.expm1(-ga / model.mean_snr)
    elif isinstance(model, TurbulenceModel):
        if model.is_gamma_gamma:
            out = _gg_cdf(model.params, ga, model.mean_snr)
        else:
            out = -np.expm1(-model.params.lam * np.sqrt(ga / model.mean_snr))
    else:
        raise TypeError(f"unsupported model {model!r}")
    return _scalar_or_array(out.reshape(g.shape) if g.ndim else out[0], g)


def ccdf_snr(model: Model, gamma):
    """Survival function ``1 - cdf_snr``.

    Closed-form tails are evaluated directly; the Gamma-Gamma tail is
    ``1 - F`` and therefore accurate in absolute terms only.
    """
    g = _as_snr(gamma)
    ga = np.atleast_1d(g).astype(float)
    if isinstance(model, RayleighRf):
        out = np.exp(-ga / model.mean_snr)
    elif isinstance(model, TurbulenceModel):
        if model.is_gamma_gamma:
            out = 1.0 - _gg_cdf(model.params, ga, model.mean_snr)
        else:
            out = np.exp(-model.params.lam * np.sqrt(ga / model.mean_snr))
    else:
        raise TypeError(f"unsupported model {model!r}")
    return _scalar_or_array(out.reshape(g.shape) if g.ndim else out[0], g)


def pdf_snr(model: Model, gamma):
    """Probability density of the instantaneous SNR of one link."""
    g = _as_snr(gamma)
    ga = np.atleast_1d(g).astype(float)
    if isinstance(model, RayleighRf):
        out = np.exp(-ga / model.mean_snr) / model.mean_snr
    elif isinstance(model, TurbulenceModel):
        if model.is_gamma_gamma:
            out = _gg_pdf(model.params, ga, model.mean_snr)
        else:
            lam, gbar = model.params.lam, model.mean_snr
            with np.errstate(divide="ignore"):
                out = lam / (2.0 * np.sqrt(ga * gbar)) * np.exp(-lam * np.sqrt(ga / gbar))
    else:
        raise TypeError(f"unsupported model {model!r}")
    return _scalar_or_array(out.reshape(g.shape) if g.ndim else out[0], g)


def sample_snr(model: Model, rng: np.random.Generator, size=None):
    """Draw SNR realisations from ``rng``.

    Gamma-Gamma: ``g = mean_snr * (X*Y*V/kappa)**2`` with unit-mean Gamma
    variates ``X``, ``Y`` and pointing loss ``V = W**(1/xi**2)``.
    """
    if isinstance(model, RayleighRf):
        w = rng.random(size)
        return -model.mean_snr * np.log1p(-w)
    if not isinstance(model, TurbulenceModel):
        raise TypeError(f"unsupported model {model!r}")
    if model.is_gamma_gamma:
        gg = model.params
        x = rng.gamma(gg.alpha, 1.0 / gg.alpha, size)
        y = rng.gamma(gg.beta, 1.0 / gg.beta, size)
        v = rng.random(size) ** (1.0 / gg.xi2)
        u = x * y * v / gg.kappa
        return model.mean_snr * u * u
    e = rng.standard_exponential(size)
    return model.mean_snr * (e / model.params.lam) ** 2


def rytov_to_gg_params(rytov_var: float) -> tuple[float, float]:
    """Scintillation parameters (alpha, beta) from the Rytov variance.

    Uses ``alpha = 1/(exp(0.49 s/(1 + 1.11 s^(6/5))) - 1)`` and
    ``beta = 1/(exp(0.51 s/(1 + 0.69 s^(6/5))) - 1)`` where ``s`` is the
    Rytov variance, i.e. without the 7/6 and 5/6 outer exponents of the
    usual plane-wave expressions.
    """
    s = _positive("rytov_var", rytov_var)
    s125 = s ** (6.0 / 5.0)  # sigma_R^(12/5) with sigma_R^2 = s
    alpha = 1.0 / math.expm1(0.49 * s / (1.0 + 1.11 * s125))
    beta = 1.0 / math.expm1(0.51 * s / (1.0 + 0.69 * s125))
    return alpha, beta


def pointing_xi(beam_radius_eq: float, jitter_std: float) -> float:
    """Pointing-error ratio of equivalent beam radius to twice the jitter std."""
    return _positive("beam_radius_eq", beam_radius_eq) / (2.0 * _positive("jitter_std", jitter_std))
