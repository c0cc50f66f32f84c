"""Outage probability and DPSK bit-error rate of the dual-hop relay.

Three families of evaluators live here:

* closed forms in Meijer-G functions (``outage_fixed_gg`` ... ``ber_adaptive_ne``),
* quadrature oracles that integrate the defining expressions directly
  (``outage_quadrature``, ``ber_quadrature``, ``outage_adaptive_exact``),
* an audit (``errata_audit``) that evaluates the literal printed variants of
  the closed forms and records every disagreement with the oracle.

Notation: ``gR`` and ``gF`` are the RF and FSO mean SNRs, ``th`` the outage
threshold, ``C`` the fixed relay gain constant, ``N`` the number of users.
The fixed-gain closed forms expand the best-user density as a binomial sum
over ``k``; the adaptive ones expand the best-user CDF instead.
"""

from __future__ import annotations

import enum
import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .channels import GammaGammaPointing, NegExpTurbulence, cdf_snr, rytov_to_gg_params
from .linkmodel import SystemConfig, best_user_cdf, best_user_pdf, binomial
from .quadrature import QuadratureError, expsinh, expsinh_nodes
from .specfun import meijer_g_array

__all__ = [
    "MetricKind",
    "Method",
    "PerformancePoint",
    "outage_fixed_gg",
    "outage_fixed_ne",
    "outage_adaptive",
    "ber_fixed_gg",
    "ber_fixed_ne",
    "ber_adaptive_gg",
    "ber_adaptive_ne",
    "outage_closed_form",
    "ber_closed_form",
    "outage_quadrature",
    "ber_quadrature",
    "outage_adaptive_exact",
    "ber_from_outage",
    "ErratumRecord",
    "errata_audit",
    "append_errata",
    "ERRATA_TOL",
]

ERRATA_TOL = 1e-6
_G_RTOL = 1e-11
_QUAD_ATOL = 1e-11


class MetricKind(str, enum.Enum):
    OUTAGE = "outage"
    BER = "ber"


class Method(str, enum.Enum):
    CLOSED_FORM = "closed"
    QUADRATURE = "quad"
    MONTE_CARLO = "mc"


@dataclass(frozen=True)
class PerformancePoint:
    """One evaluated point of a performance curve."""

    gamma_avg_db: float
    metric: float
    metric_kind: MetricKind
    method: Method
    ci_half_width: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.metric <= 1.0):
            raise ValueError(f"metric outside [0, 1]: {self.metric!r}")
        if not (self.ci_half_width >= 0.0):
            raise ValueError("ci_half_width must be non-negative")


# -- helpers ------------------------------------------------------------------


def _gg_consts(gg: GammaGammaPointing):
    xi2 = gg.xi2
    log_k = (math.log(xi2) + (gg.alpha + gg.beta - 3.0) * math.log(2.0) - math.log(math.pi)
             - math.lgamma(gg.alpha) - math.lgamma(gg.beta))
    return xi2, math.exp(log_k), (gg.alpha * gg.beta * gg.kappa) ** 2


def _G(m, n, a, b, z):
    return float(meijer_g_array(m, n, a, b, np.array([z], dtype=float), rtol=_G_RTOL)[0])


def _clip(p, hi=1.0):
    return min(max(p, 0.0), hi)


def _require(cfg: SystemConfig, fixed: bool, model):
    if cfg.is_fixed != fixed:
        raise ValueError("relay scheme does not match the requested evaluator")
    if not isinstance(cfg.fso.params, model):
        raise ValueError("turbulence model does not match the requested evaluator")


def _fixed_gg_outage_g(gg, a_last=1.0):
    xi2 = gg.xi2
    al, be = gg.alpha, gg.beta
    a = (0.0, (1 - xi2) / 2, (2 - xi2) / 2, (1 - al) / 2, (2 - al) / 2,
         (1 - be) / 2, (2 - be) / 2, 0.5, a_last)
    b = (0.0, 0.5, -xi2 / 2, (1 - xi2) / 2)
    return a, b


# -- fixed gain: outage -----------------------------------------------------------


def outage_fixed_gg(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """Outage probability, fixed gain, Gamma-Gamma with pointing errors.

    ``1 - sum_k C(N-1,k) (-1)^k N/(k+1) e^{-(k+1) th/gR} [1 - K G^{2,7}_{9,4}(...)]``
    with ``K = xi^2 2^(alpha+beta-3) / (pi Gamma(alpha) Gamma(beta))``.
    """
    _require(cfg, True, GammaGammaPointing)
    val = _outage_fixed_gg(cfg)
    return _maybe_trusted(cfg, val, MetricKind.OUTAGE, trusted)


def _outage_fixed_gg(cfg, a_last=1.0):
    th = cfg.gamma_th
    if th == 0.0:
        return 0.0
    gg = cfg.fso.params
    _, K, abk2 = _gg_consts(gg)
    gR, gF, C, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.relay.c, cfg.n_users
    a, b = _fixed_gg_outage_g(gg, a_last)
    terms = []
    for k in range(N):
        z = 16.0 * gF * gR / (abk2 * th * C * (k + 1))
        inner = 1.0 - K * _G(2, 7, a, b, z)
        terms.append((-1) ** k * binomial(N - 1, k) * N / (k + 1)
                     * math.exp(-(k + 1) * th / gR) * inner)
    return _clip(1.0 - math.fsum(terms))


def outage_fixed_ne(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """Outage probability, fixed gain, Negative-Exponential turbulence.

    ``1 - sum_k C(N-1,k) (-1)^k N/(sqrt(pi)(k+1)) e^{-(k+1) th/gR}
    G^{0,3}_{3,0}(4 gF gR / (lam^2 th C (k+1)) | 0, 1, 1/2; -)``.
    """
    _require(cfg, True, NegExpTurbulence)
    th = cfg.gamma_th
    if th == 0.0:
        return 0.0
    lam = cfg.fso.params.lam
    gR, gF, C, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.relay.c, cfg.n_users
    terms = []
    for k in range(N):
        z = 4.0 * gF * gR / (lam**2 * th * C * (k + 1))
        g = _G(0, 3, (0.0, 1.0, 0.5), (), z)
        terms.append((-1) ** k * binomial(N - 1, k) * N / (math.sqrt(math.pi) * (k + 1))
                     * math.exp(-(k + 1) * th / gR) * g)
    val = _clip(1.0 - math.fsum(terms))
    return _maybe_trusted(cfg, val, MetricKind.OUTAGE, trusted)


# -- fixed gain: BER -----------------------------------------------------------


def ber_fixed_gg(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """DPSK BER, fixed gain, Gamma-Gamma with pointing errors."""
    _require(cfg, True, GammaGammaPointing)
    gg = cfg.fso.params
    xi2, K, abk2 = _gg_consts(gg)
    al, be = gg.alpha, gg.beta
    gR, gF, C, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.relay.c, cfg.n_users
    a = (0.0, 1.0, 0.5, (2 + xi2) / 2, (1 + xi2) / 2)
    b = (1.0, (1 + xi2) / 2, xi2 / 2, (1 + al) / 2, al / 2, (1 + be) / 2, be / 2, 0.5, 0.0)
    terms = []
    for k in range(N):
        sig = 1.0 + (k + 1) / gR
        z = abk2 * C * (k + 1) / (16.0 * gF * (gR + k + 1))
        inner = 1.0 - K * _G(7, 3, a, b, z)
        terms.append((-1) ** k * binomial(N - 1, k) * N / (k + 1) / sig * inner)
    val = _clip(0.5 * (1.0 - math.fsum(terms)), 0.5)
    return _maybe_trusted(cfg, val, MetricKind.BER, trusted)


def _ber_fixed_ne(cfg, printed=False):
    lam = cfg.fso.params.lam
    gR, gF, C, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.relay.c, cfg.n_users
    terms = []
    for k in range(N):
        sig = 1.0 + (k + 1) / gR
        if printed:
            coef = N / math.sqrt(math.pi * (k + 1))
            z = 4.0 * gF * gR / (lam**2 * C * (k + 1))
        else:
            coef = N / (math.sqrt(math.pi) * (k + 1))
            z = lam**2 * C * (k + 1) / (4.0 * gF * (gR + k + 1))
        g = _G(3, 1, (0.0,), (1.0, 0.0, 0.5), z)
        terms.append((-1) ** k * binomial(N - 1, k) * coef / sig * g)
    return 0.5 * (1.0 - math.fsum(terms))


def ber_fixed_ne(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """DPSK BER, fixed gain, Negative-Exponential turbulence.

    ``1/2 {1 - sum_k C(N-1,k) (-1)^k N/(sqrt(pi)(k+1)) / (1 + (k+1)/gR)
    G^{3,1}_{1,3}(lam^2 C (k+1) / (4 gF (gR + k + 1)) | 0; 1, 0, 1/2)}``.
    """
    _require(cfg, True, NegExpTurbulence)
    val = _clip(_ber_fixed_ne(cfg), 0.5)
    return _maybe_trusted(cfg, val, MetricKind.BER, trusted)


# -- adaptive gain -------------------------------------------------------------


def outage_adaptive(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """Outage under the min-SNR approximation: ``F_R + F_F - F_R F_F`` at ``th``."""
    if cfg.is_fixed:
        raise ValueError("relay scheme does not match the requested evaluator")
    th = cfg.gamma_th
    fr = best_user_cdf(cfg.rf, cfg.n_users, th)
    ff = cdf_snr(cfg.fso, th)
    return _clip(fr + ff - fr * ff)


def _adaptive_gg_laplace(gg, gF, sigma):
    # integral of e^{-sigma g} F_F(g) over (0, inf)
    xi2, K, abk2 = _gg_consts(gg)
    al, be = gg.alpha, gg.beta
    a = (0.0, 0.5, 1.0, (1 + xi2) / 2, (2 + xi2) / 2)
    b = (xi2 / 2, (1 + xi2) / 2, al / 2, (1 + al) / 2, be / 2, (1 + be) / 2, 0.0, 0.5)
    return K / sigma * _G(6, 3, a, b, abk2 / (16.0 * gF * sigma))


def ber_adaptive_gg(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """DPSK BER, adaptive gain (min-SNR approximation), Gamma-Gamma.

    ``1/2 {L(1) + sum_{k=0}^N C(N,k) (-1)^k [1/s_k - L(s_k)]}`` with
    ``s_k = 1 + k/gR`` and ``L(s)`` the Laplace transform of the FSO CDF,
    a ``G^{6,3}_{5,8}`` function.
    """
    _require(cfg, False, GammaGammaPointing)
    gg = cfg.fso.params
    gR, gF, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.n_users
    terms = [_adaptive_gg_laplace(gg, gF, 1.0)]
    for k in range(N + 1):
        sig = 1.0 + k / gR
        terms.append((-1) ** k * binomial(N, k) * (1.0 / sig - _adaptive_gg_laplace(gg, gF, sig)))
    val = _clip(0.5 * math.fsum(terms), 0.5)
    return _maybe_trusted(cfg, val, MetricKind.BER, trusted)


def _ne_laplace_ccdf(lam, gF, sigma):
    # integral of e^{-sigma g} e^{-lam sqrt(g/gF)} over (0, inf)
    return _G(2, 1, (0.0,), (0.0, 0.5), lam**2 / (4.0 * gF * sigma)) / (math.sqrt(math.pi) * sigma)


def ber_adaptive_ne(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """DPSK BER, adaptive gain (min-SNR approximation), Negative-Exponential.

    ``1/2 {1 - M(1) + sum_{k=0}^N C(N,k) (-1)^k M(s_k)}`` with
    ``M(s) = G^{2,1}_{1,2}(lam^2/(4 gF s) | 0; 0, 1/2) / (sqrt(pi) s)``.
    """
    _require(cfg, False, NegExpTurbulence)
    lam = cfg.fso.params.lam
    gR, gF, N = cfg.rf.mean_snr, cfg.fso.mean_snr, cfg.n_users
    terms = [1.0, -_ne_laplace_ccdf(lam, gF, 1.0)]
    for k in range(N + 1):
        terms.append((-1) ** k * binomial(N, k) * _ne_laplace_ccdf(lam, gF, 1.0 + k / gR))
    val = _clip(0.5 * math.fsum(terms), 0.5)
    return _maybe_trusted(cfg, val, MetricKind.BER, trusted)


def outage_closed_form(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """Dispatch to the closed-form outage for the scenario's scheme and model."""
    if not cfg.is_fixed:
        return outage_adaptive(cfg, trusted=trusted)
    if isinstance(cfg.fso.params, GammaGammaPointing):
        return outage_fixed_gg(cfg, trusted=trusted)
    return outage_fixed_ne(cfg, trusted=trusted)


def ber_closed_form(cfg: SystemConfig, *, trusted: bool = False) -> float:
    """Dispatch to the closed-form BER for the scenario's scheme and model."""
    gg = isinstance(cfg.fso.params, GammaGammaPointing)
    if cfg.is_fixed:
        return ber_fixed_gg(cfg, trusted=trusted) if gg else ber_fixed_ne(cfg, trusted=trusted)
    return ber_adaptive_gg(cfg, trusted=trusted) if gg else ber_adaptive_ne(cfg, trusted=trusted)


# -- quadrature oracles --------------------------------------------------------


def _fixed_success_kernel(cfg: SystemConfig):
    """Nodes ``u`` and ``1 - F_F(C/u)`` for the scaled fixed-gain integral.

    With ``x = g u`` the success probability at threshold ``g`` is
    ``g * int (1 - F_F(C/u)) f_R(g (u + 1)) du``; the FSO factor no longer
    depends on ``g`` and can be shared between thresholds.
    """
    C = cfg.relay.c

    def surv(u):
        with np.errstate(divide="ignore"):
            return 1.0 - cdf_snr(cfg.fso, C / u)
    return surv


def outage_quadrature(cfg: SystemConfig, *, atol: float = _QUAD_ATOL) -> float:
    """Outage probability by direct numerical integration.

    Fixed gain integrates ``1 - int (1 - F_F(th C/x)) f_R(x + th) dx``;
    adaptive gain evaluates the min-CDF identity, which needs no integral.
    """
    th = cfg.gamma_th
    if th == 0.0:
        return 0.0
    if not cfg.is_fixed:
        return outage_adaptive(cfg)
    surv = _fixed_success_kernel(cfg)
    rf, N = cfg.rf, cfg.n_users

    def integrand(u):
        return th * surv(u) * best_user_pdf(rf, N, th * (u + 1.0))

    res = expsinh(integrand, scale=max(rf.mean_snr / th, 1e-3), atol=atol)
    return _clip(1.0 - res.value)


def outage_adaptive_exact(cfg: SystemConfig, *, atol: float = _QUAD_ATOL) -> float:
    """Outage of the exact adaptive-gain combiner (no min approximation).

    ``1 - int (1 - F_F(th (x + th + 1) / x)) f_R(x + th) dx``.
    """
    th = cfg.gamma_th
    if th == 0.0:
        return 0.0
    rf, N = cfg.rf, cfg.n_users

    def integrand(x):
        with np.errstate(divide="ignore"):
            s = 1.0 - cdf_snr(cfg.fso, th * (x + th + 1.0) / x)
        return s * best_user_pdf(rf, N, x + th)

    res = expsinh(integrand, scale=max(rf.mean_snr, th), atol=atol)
    return _clip(1.0 - res.value)


def _gauss_legendre(f, lo, hi, atol):
    prev = None
    for n in (16, 32, 64, 128, 256):
        x, w = np.polynomial.legendre.leggauss(n)
        half = 0.5 * (hi - lo)
        cur = half * float(np.sum(w * f(lo + half * (x + 1.0))))
        if prev is not None and abs(cur - prev) <= atol:
            return cur
        prev = cur
    raise QuadratureError(f"Gauss-Legendre rule did not converge on [{lo:g}, {hi:g}]")


def ber_from_outage(outage, *, atol: float = _QUAD_ATOL, breaks=()) -> float:
    """``1/2 int e^{-g} P_out(g) dg`` for a vectorised outage function.

    ``breaks`` lists points where ``outage`` may jump; the integral is split
    there so each piece has a smooth integrand.
    """
    def f(g):
        return np.exp(-g) * outage(g)

    edges = sorted(float(b) for b in breaks if b > 0.0)
    total, lo = 0.0, 0.0
    for hi in edges:
        total += _gauss_legendre(f, lo, hi, atol)
        lo = hi
    total += expsinh(lambda x: f(lo + x), scale=1.0, atol=atol).value
    return _clip(0.5 * total, 0.5)


def ber_quadrature(cfg: SystemConfig, *, atol: float = _QUAD_ATOL) -> float:
    """DPSK BER ``1/2 int e^{-g} P_out(g) dg`` with a quadrature outage.

    For fixed gain the inner outage integral is nested; the FSO factor is
    evaluated once per inner node and shared across all outer nodes.
    """
    if not cfg.is_fixed:
        def outage(g):
            fr = best_user_cdf(cfg.rf, cfg.n_users, g)
            ff = cdf_snr(cfg.fso, g)
            return fr + ff - fr * ff
        return ber_from_outage(outage, atol=atol)

    surv = _fixed_success_kernel(cfg)
    rf, N = cfg.rf, cfg.n_users
    prev = None
    for level in range(3, 10):
        gx, gw = expsinh_nodes(level, 1.0)
        keep = gx < 800.0
        gx, gw = gx[keep], gw[keep]
        ux, uw = expsinh_nodes(level, max(rf.mean_snr, 1e-3))
        s = surv(ux)
        live = s > 0.0
        ux, uw, s = ux[live], uw[live], s[live]
        dens = best_user_pdf(rf, N, gx[:, None] * (ux[None, :] + 1.0))
        success = gx * (dens @ (uw * s))
        cur = 0.5 * float(np.sum(gw * np.exp(-gx) * (1.0 - success)))
        if prev is not None and abs(cur - prev) <= atol:
            return _clip(cur, 0.5)
        prev = cur
    raise QuadratureError(f"nested BER quadrature did not converge for {cfg.fingerprint()}")


def quadrature_value(cfg: SystemConfig, kind: MetricKind) -> float:
    return outage_quadrature(cfg) if MetricKind(kind) is MetricKind.OUTAGE else ber_quadrature(cfg)


# -- errata audit and trusted mode ---------------------------------------------


@dataclass(frozen=True)
class ErratumRecord:
    eq_id: str
    fingerprint: str
    closed_form: float
    oracle: float

    @property
    def gap(self) -> float:
        return abs(self.closed_form - self.oracle)

    def line(self) -> str:
        return (f"{self.eq_id}\t{self.fingerprint}\t{self.closed_form:.12g}\t"
                f"{self.oracle:.12g}\t{self.gap:.3e}")


def _errata_path():
    return Path(os.environ.get("LINKLAB_ERRATA_LOG", "errata.log"))


def append_errata(records, path=None) -> Path:
    """Append records to the errata log (one tab-separated line each)."""
    path = Path(path) if path is not None else _errata_path()
    with open(path, "a", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.line() + "\n")
    return path


def _maybe_trusted(cfg, val, kind, trusted):
    if not trusted:
        return val
    oracle = quadrature_value(cfg, kind)
    if abs(val - oracle) > ERRATA_TOL:
        tag = f"{kind.value}-{'fixed' if cfg.is_fixed else 'adaptive'}-closed-form"
        append_errata([ErratumRecord(tag, cfg.fingerprint(), val, oracle)])
        return oracle
    return val


def _printed_outage_fixed_gg(cfg):
    # last upper parameter printed as 1/2
    return _outage_fixed_gg(cfg, a_last=0.5)


def _printed_outage_adaptive_gg(cfg):
    # extra e^{+th/gR} on the product term
    th, gR = cfg.gamma_th, cfg.rf.mean_snr
    fr = best_user_cdf(cfg.rf, cfg.n_users, th)
    ff = cdf_snr(cfg.fso, th)
    return fr + ff - fr * math.exp(th / gR) * ff


def _printed_ber_fixed_ne(cfg):
    # coefficient N/sqrt(pi (k+1)) and unflipped argument with the free
    # integration variable set to one
    return _ber_fixed_ne(cfg, printed=True)


def _printed_ber_adaptive_gg(cfg):
    # only the first term survives in print, with nine lower parameters
    gg = cfg.fso.params
    xi2, K, abk2 = _gg_consts(gg)
    al, be = gg.alpha, gg.beta
    a = (0.0, 1.0, 0.5, (1 + xi2) / 2, (2 + xi2) / 2)
    b = (xi2, (1 + xi2) / 2, xi2 / 2, (1 + al) / 2, al / 2, (1 + be) / 2, be / 2, 0.0, 0.5)
    return 0.5 * K * _G(6, 3, a, b, abk2 / (16.0 * cfg.fso.mean_snr))


# (id, applies(cfg), printed evaluator, metric)
_PRINTED = [
    ("outage-fixed-gg", lambda c: c.is_fixed and c.fso.is_gamma_gamma,
     _printed_outage_fixed_gg, MetricKind.OUTAGE),
    ("outage-fixed-ne", lambda c: c.is_fixed and not c.fso.is_gamma_gamma,
     lambda c: outage_fixed_ne(c), MetricKind.OUTAGE),
    ("ber-fixed-gg", lambda c: c.is_fixed and c.fso.is_gamma_gamma,
     lambda c: ber_fixed_gg(c), MetricKind.BER),
    ("ber-fixed-ne", lambda c: c.is_fixed and not c.fso.is_gamma_gamma,
     _printed_ber_fixed_ne, MetricKind.BER),
    ("outage-adaptive-gg", lambda c: not c.is_fixed and c.fso.is_gamma_gamma,
     _printed_outage_adaptive_gg, MetricKind.OUTAGE),
    ("outage-adaptive-ne", lambda c: not c.is_fixed and not c.fso.is_gamma_gamma,
     lambda c: outage_adaptive(c), MetricKind.OUTAGE),
    ("ber-adaptive-gg", lambda c: not c.is_fixed and c.fso.is_gamma_gamma,
     _printed_ber_adaptive_gg, MetricKind.BER),
    ("ber-adaptive-ne", lambda c: not c.is_fixed and not c.fso.is_gamma_gamma,
     lambda c: ber_adaptive_ne(c), MetricKind.BER),
]


def errata_audit(configs, *, log_path=None, write=True):
    """Compare literal printed closed forms with the quadrature oracle.

    Every (expression, config) pair whose gap exceeds ``ERRATA_TOL`` becomes
    an ``ErratumRecord``.  The scintillation-parameter mapping is audited
    once against the plane-wave expressions with the 7/6 and 5/6 exponents.
    Records are appended to the errata log when ``write`` is true.
    """
    out = []
    for cfg in configs:
        for eq_id, applies, printed, kind in _PRINTED:
            if not applies(cfg):
                continue
            try:
                lit = float(printed(cfg))
            except (ValueError, ArithmeticError):
                lit = math.nan
            ref = quadrature_value(cfg, kind)
            rec = ErratumRecord(eq_id, cfg.fingerprint(), lit, ref)
            if not (rec.gap <= ERRATA_TOL):
                out.append(rec)
    s = 1.0
    a_lit, b_lit = rytov_to_gg_params(s)
    a_std = 1.0 / math.expm1(0.49 * s / (1 + 1.11 * s ** 1.2) ** (7 / 6))
    b_std = 1.0 / math.expm1(0.51 * s / (1 + 0.69 * s ** 1.2) ** (5 / 6))
    out.append(ErratumRecord("rytov-alpha", "rytov_var=1", a_lit, a_std))
    out.append(ErratumRecord("rytov-beta", "rytov_var=1", b_lit, b_std))
    if write and out:
        append_errata(out, log_path)
    return out

