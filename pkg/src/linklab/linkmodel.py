"""Best-of-N RF selection statistics and end-to-end relay SNR combining."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .channels import (
    GammaGammaPointing,
    NegExpTurbulence,
    RayleighRf,
    TurbulenceModel,
    db_to_linear,
)

__all__ = [
    "FixedGain",
    "AdaptiveGain",
    "SystemConfig",
    "binomial",
    "best_user_cdf",
    "best_user_pdf",
    "best_user_pdf_series",
    "end_to_end_snr",
    "end_to_end_snr_min_approx",
    "REGIMES",
    "regime_params",
    "regime_label",
    "make_config",
]

_EXACT_BINOMIAL_MAX = 64


@dataclass(frozen=True)
class FixedGain:
    """Fixed relay gain ``G^2 = 1 / (C sigma^2)``."""

    c: float = 1.0

    def __post_init__(self):
        c = float(self.c)
        if not math.isfinite(c) or c <= 0.0:
            raise ValueError(f"fixed gain constant must be positive, got {self.c!r}")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class AdaptiveGain:
    """Channel-state-dependent relay gain."""


Relay = Union[FixedGain, AdaptiveGain]


@dataclass(frozen=True)
class SystemConfig:
    """A complete dual-hop scenario.

    Attributes
    ----------
    n_users : int
        Number of RF users competing for the relay.
    rf : RayleighRf
        Per-user RF link statistics (identical across users).
    fso : TurbulenceModel
        Relay-to-destination optical hop.
    relay : FixedGain or AdaptiveGain
    gamma_th : float
        Outage threshold, linear.
    eta : float
        Optical-electrical conversion efficiency.  It is absorbed into
        ``fso.mean_snr`` and carried only for bookkeeping.
    """

    n_users: int
    rf: RayleighRf
    fso: TurbulenceModel
    relay: Relay = FixedGain()
    gamma_th: float = 10.0
    eta: float = 1.0

    def __post_init__(self):
        if isinstance(self.n_users, bool) or int(self.n_users) != self.n_users or self.n_users < 1:
            raise ValueError(f"n_users must be a positive integer, got {self.n_users!r}")
        object.__setattr__(self, "n_users", int(self.n_users))
        if not isinstance(self.rf, RayleighRf):
            raise TypeError("rf must be a RayleighRf")
        if not isinstance(self.fso, TurbulenceModel):
            raise TypeError("fso must be a TurbulenceModel")
        if not isinstance(self.relay, (FixedGain, AdaptiveGain)):
            raise TypeError("relay must be FixedGain or AdaptiveGain")
        th = float(self.gamma_th)
        if not (th >= 0.0) or math.isinf(th):
            raise ValueError(f"gamma_th must be finite and non-negative, got {self.gamma_th!r}")
        object.__setattr__(self, "gamma_th", th)
        eta = float(self.eta)
        if not math.isfinite(eta) or eta <= 0.0:
            raise ValueError(f"eta must be positive, got {self.eta!r}")
        object.__setattr__(self, "eta", eta)

    @property
    def is_fixed(self) -> bool:
        return isinstance(self.relay, FixedGain)

    def with_gamma_avg(self, gamma_avg: float) -> "SystemConfig":
        """Copy with both hop mean SNRs set to ``gamma_avg`` (linear)."""
        return replace(self, rf=RayleighRf(gamma_avg),
                       fso=TurbulenceModel(self.fso.params, gamma_avg))

    def fingerprint(self) -> str:
        """Short human-readable identity used in logs."""
        fp = self.fso.params
        if isinstance(fp, GammaGammaPointing):
            turb = f"gg(a={fp.alpha:g},b={fp.beta:g},xi={fp.xi:g},k={fp.kappa:.6g})"
        else:
            turb = f"ne(l={fp.lam:g})"
        relay = f"fixed(C={self.relay.c:g})" if self.is_fixed else "adaptive"
        return (f"N={self.n_users};{turb};{relay};gth={self.gamma_th:.6g};"
                f"grf={self.rf.mean_snr:.6g};gfso={self.fso.mean_snr:.6g}")


def binomial(n: int, k: int) -> float:
    """Binomial coefficient; exact integers up to n = 64, log-gamma beyond."""
    if k < 0 or k > n:
        return 0.0
    if n <= _EXACT_BINOMIAL_MAX:
        return float(math.comb(n, k))
    return math.exp(math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1))


def best_user_cdf(rf: RayleighRf, n: int, gamma):
    """CDF of the largest of ``n`` i.i.d. Rayleigh-faded SNRs."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise ValueError("SNR argument must be non-negative")
    if n < 1:
        raise ValueError("n must be >= 1")
    out = (-np.expm1(-g / rf.mean_snr)) ** n
    return float(out) if out.ndim == 0 else out


def best_user_pdf(rf: RayleighRf, n: int, gamma):
    """Density of the best-user SNR, ``n F^(n-1) f``."""
    g = np.asarray(gamma, dtype=float)
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise ValueError("SNR argument must be non-negative")
    if n < 1:
        raise ValueError("n must be >= 1")
    gb = rf.mean_snr
    out = n * (-np.expm1(-g / gb)) ** (n - 1) * np.exp(-g / gb) / gb
    return float(out) if out.ndim == 0 else out


def best_user_pdf_series(rf: RayleighRf, n: int, gamma):
    """Binomial-expansion form ``n/gb sum_k C(n-1,k) (-1)^k e^{-(k+1) g/gb}``.

    Terms are accumulated with ``math.fsum``, so the alternating sum is
    correctly rounded for each point.
    """
    g = np.atleast_1d(np.asarray(gamma, dtype=float))
    if np.any(g < 0) or np.any(np.isnan(g)):
        raise ValueError("SNR argument must be non-negative")
    gb = rf.mean_snr
    coef = [(-1) ** k * binomial(n - 1, k) for k in range(n)]
    out = np.empty_like(g)
    for i, x in enumerate(g):
        out[i] = n / gb * math.fsum(c * math.exp(-(k + 1) * x / gb) for k, c in enumerate(coef))
    return float(out[0]) if np.ndim(gamma) == 0 else out.reshape(np.shape(gamma))


def end_to_end_snr(relay: Relay, gamma_fso, gamma_rf):
    """Exact per-realisation end-to-end SNR of the AF relay."""
    gf = np.asarray(gamma_fso, dtype=float)
    gr = np.asarray(gamma_rf, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        if isinstance(relay, FixedGain):
            out = gf * gr / (gf + relay.c)
        elif isinstance(relay, AdaptiveGain):
            out = gf * gr / (gf + gr + 1.0)
        else:
            raise TypeError(f"unsupported relay {relay!r}")
    return float(out) if out.ndim == 0 else out


def end_to_end_snr_min_approx(gamma_fso, gamma_rf):
    """High-SNR approximation ``min(gamma_fso, gamma_rf)`` for adaptive gain."""
    out = np.minimum(np.asarray(gamma_fso, dtype=float), np.asarray(gamma_rf, dtype=float))
    return float(out) if out.ndim == 0 else out


# -- named scenarios ----------------------------------------------------------

REGIMES = {
    "moderate-gg": GammaGammaPointing(4.0, 1.9, 10.45),
    "strong-gg": GammaGammaPointing(4.2, 1.4, 2.45),
}


def regime_params(name: str):
    """Turbulence parameters for a regime label.

    ``moderate-gg`` and ``strong-gg`` are the built-in Gamma-Gamma sets;
    ``negexp-l<lam>`` selects Negative-Exponential with that ``lam``.
    """
    if name in REGIMES:
        return REGIMES[name]
    if name.startswith("negexp-l"):
        try:
            lam = float(name[len("negexp-l"):])
        except ValueError:
            raise ValueError(f"bad regime label {name!r}") from None
        return NegExpTurbulence(lam)
    raise ValueError(f"unknown regime {name!r}")


def regime_label(params) -> str:
    for name, p in REGIMES.items():
        if p == params:
            return name
    if isinstance(params, NegExpTurbulence):
        return f"negexp-l{params.lam:g}"
    return f"gg-a{params.alpha:g}-b{params.beta:g}-xi{params.xi:g}"


def make_config(regime, gamma_avg_db: float, *, n_users: int = 2, relay: Relay = FixedGain(),
                gamma_th_db: float = 10.0, eta: float = 1.0) -> SystemConfig:
    """Scenario with ``mean_snr_rf = mean_snr_fso = 10^(gamma_avg_db/10)``."""
    params = regime_params(regime) if isinstance(regime, str) else regime
    gavg = float(db_to_linear(gamma_avg_db))
    return SystemConfig(n_users=n_users, rf=RayleighRf(gavg), fso=TurbulenceModel(params, gavg),
                        relay=relay, gamma_th=float(db_to_linear(gamma_th_db)), eta=eta)
