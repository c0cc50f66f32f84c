"""Log-gamma and Meijer-G evaluation for real positive arguments.

The Meijer-G function is evaluated as the sum of residues at the poles of
``Gamma(b_j - s)``, ``j <= m`` (Slater's theorem).  Three routes share that
definition:

* a vectorised double-precision residue series, used whenever its own
  round-off estimate is inside the requested tolerance;
* a trapezoidal Mellin-Barnes contour integral on a vertical line, used
  for large arguments where the alternating residue series cancels;
* the residue series in arbitrary precision (mpmath arithmetic), with
  the working precision raised until the cancellation is covered.

Coincident poles (``b_j - b_k`` a non-negative integer for ``j, k <= m``)
are separated by shifting the colliding parameters by distinct multiples
of a small ``pole_shift`` and Richardson-extrapolating the values obtained
with shifts ``h``, ``h/2`` and ``h/4`` (``h = pole_shift``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import mpmath
import numpy as np
from scipy import special

__all__ = [
    "MeijerGError",
    "UnsupportedInstance",
    "MeijerGSpec",
    "log_gamma",
    "gamma",
    "meijer_g",
    "meijer_g_array",
]

_EPS = np.finfo(float).eps
_MAX_TERMS = 10_000
_ROUTES = ("auto", "series", "contour")
_BATCH = 64
_Z_CHUNK = 2048
# largest series peak index handed to the multi-precision route
_MP_PEAK_LIMIT = 400.0
# accuracy accepted from the contour rule when the series route is impractical
_MB_RELAXED_RTOL = 1e-8


class MeijerGError(ValueError):
    """Invalid Meijer-G parameters."""


class UnsupportedInstance(MeijerGError):
    """No convergent evaluation strategy exists for the parameter set."""


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma requires a finite positive argument, got {x!r}")
    return math.lgamma(x)


def gamma(x: float) -> float:
    """Gamma function for ``x > 0``; overflows to ``inf`` past ``x ~ 171.6``."""
    lg = log_gamma(x)
    return math.exp(lg) if lg < 709.0 else math.inf


@dataclass(frozen=True)
class MeijerGSpec:
    """One Meijer-G instance ``G^{m,n}_{p,q}(z | a; b)`` with real ``z > 0``."""

    m: int
    n: int
    a: tuple[float, ...]
    b: tuple[float, ...]
    z: float

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        object.__setattr__(self, "b", tuple(float(v) for v in self.b))
        _validate(self.m, self.n, self.a, self.b)
        z = float(self.z)
        if not math.isfinite(z) or z <= 0.0:
            raise MeijerGError(f"argument z must be finite and positive, got {self.z!r}")
        object.__setattr__(self, "z", z)

    @property
    def p(self) -> int:
        return len(self.a)

    @property
    def q(self) -> int:
        return len(self.b)

    def flipped(self) -> "MeijerGSpec":
        """Same value written with reciprocal argument: G^{n,m}_{q,p}(1/z | 1-b; 1-a)."""
        return MeijerGSpec(
            self.n,
            self.m,
            tuple(1.0 - v for v in self.b),
            tuple(1.0 - v for v in self.a),
            1.0 / self.z,
        )


def _validate(m: int, n: int, a: Sequence[float], b: Sequence[float]) -> None:
    p, q = len(a), len(b)
    if not (0 <= m <= q and 0 <= n <= p):
        raise MeijerGError(f"need 0 <= m <= q and 0 <= n <= p, got m={m}, n={n}, p={p}, q={q}")
    if not all(math.isfinite(v) for v in (*a, *b)):
        raise MeijerGError("Meijer-G parameters must be finite")
    for ai in a[:n]:
        for bj in b[:m]:
            d = ai - bj
            if d >= 1.0 and d == math.floor(d):
                raise MeijerGError(
                    f"poles of Gamma(1-a+s) and Gamma(b-s) coincide (a={ai}, b={bj})"
                )


def meijer_g(
    spec: MeijerGSpec, *, rtol: float = 1e-10, atol: float = 0.0, pole_shift: float = 1e-6,
    route: str = "auto",
) -> float:
    """Evaluate one Meijer-G instance.

    Parameters
    ----------
    spec : MeijerGSpec
    rtol, atol : float
        Target relative error, or absolute error when that is looser.
    pole_shift : float
        Separation applied to coincident poles before extrapolation.
    route : {"auto", "series", "contour"}
        ``auto`` takes the most accurate available evaluation; ``series``
        and ``contour`` restrict evaluation to the residue series or to the
        Mellin-Barnes integral, for cross-checking.

    Raises
    ------
    UnsupportedInstance
        When no convergent strategy exists (``p == q`` at ``z == 1``, or the
        series does not settle within the term cap).
    """
    out = meijer_g_array(spec.m, spec.n, spec.a, spec.b, np.array([spec.z]),
                         rtol=rtol, atol=atol, pole_shift=pole_shift, route=route)
    return float(out[0])


def meijer_g_array(
    m: int,
    n: int,
    a: Sequence[float],
    b: Sequence[float],
    z,
    *,
    rtol: float = 1e-10,
    atol: float = 0.0,
    pole_shift: float = 1e-6,
    route: str = "auto",
) -> np.ndarray:
    """Vectorised :func:`meijer_g` over an array of positive arguments ``z``.

    An entry is accepted once its error estimate is below
    ``max(rtol * |G|, atol)``.
    """
    a = tuple(float(v) for v in a)
    b = tuple(float(v) for v in b)
    _validate(m, n, a, b)
    if route not in _ROUTES:
        raise ValueError(f"route must be one of {_ROUTES}, got {route!r}")
    z = np.asarray(z, dtype=float)
    shape = z.shape
    z = z.ravel()
    if np.any(~np.isfinite(z)) or np.any(z <= 0.0):
        raise MeijerGError("arguments z must be finite and positive")
    out = np.empty_like(z)
    p, q = len(a), len(b)
    if p > q:
        out[:] = _evaluate(n, m, _flip(b), _flip(a), 1.0 / z, (rtol, atol), pole_shift, route)
    elif p < q:
        out[:] = _evaluate(m, n, a, b, z, (rtol, atol), pole_shift, route)
    else:
        if np.any(z == 1.0):
            raise UnsupportedInstance("p == q at z == 1: residue series does not converge")
        lo = z < 1.0
        if lo.any():
            out[lo] = _evaluate(m, n, a, b, z[lo], (rtol, atol), pole_shift, route)
        if (~lo).any():
            out[~lo] = _evaluate(n, m, _flip(b), _flip(a), 1.0 / z[~lo], (rtol, atol), pole_shift, route)
    return out.reshape(shape)


def _flip(v: tuple[float, ...]) -> tuple[float, ...]:
    return tuple(1.0 - x for x in v)


def _evaluate(m, n, a, b, z, tols, pole_shift, route="auto") -> np.ndarray:
    if m == 0:
        return np.zeros_like(z)
    shifts = _collision_shifts(b[:m])
    out = np.empty_like(z)
    with np.errstate(invalid="ignore", over="ignore", under="ignore", divide="ignore"):
        for lo in range(0, z.size, _Z_CHUNK):
            out[lo:lo + _Z_CHUNK] = _evaluate_chunk(
                m, n, a, b, z[lo:lo + _Z_CHUNK], shifts, tols, pole_shift, route
            )
    return out


def _evaluate_chunk(m, n, a, b, z, shifts, tols, pole_shift, route="auto"):
    rtol, atol = tols
    val, err = np.full(z.shape, np.nan), np.full(z.shape, np.inf)
    if route != "contour":
        try:
            val, err = _series_float_extrapolated(m, n, a, b, z, shifts, pole_shift)
        except UnsupportedInstance:
            # the double-precision series is hopeless here; try the contour
            if route == "series":
                raise
    bad = ~(err <= np.maximum(rtol * np.abs(val), atol))
    best = np.full(z.shape, np.nan)
    best_err = np.full(z.shape, np.inf)
    if bad.any() and route != "series":
        mb = _mellin_barnes_float(m, n, a, b, z[bad])
        if mb is not None:
            v2, e2 = mb
            idx = np.flatnonzero(bad)
            best[idx], best_err[idx] = v2, e2
            ok = e2 <= np.maximum(rtol * np.abs(v2), atol)
            val[idx[ok]] = v2[ok]
            bad[idx[ok]] = False
    if route == "contour" and bad.any():
        raise UnsupportedInstance("Mellin-Barnes contour did not reach the tolerance")
    mu = len(b) - len(a)
    for i in np.flatnonzero(bad):
        # the residue series peaks near k ~ z**(1/mu); beyond a few hundred
        # terms the multi-precision sum is impractical
        if mu > 0 and z[i] ** (1.0 / mu) > _MP_PEAK_LIMIT:
            if best_err[i] <= max(_MB_RELAXED_RTOL * abs(best[i]), atol):
                val[i] = best[i]
                continue
            raise UnsupportedInstance(
                f"no accurate route for G^{m},{n}_{len(a)},{len(b)} at z={z[i]:.6g}")
        val[i] = _series_mp(m, n, a, b, float(z[i]), shifts, pole_shift, rtol, atol)
    return val


def _collision_shifts(bm: tuple[float, ...]) -> tuple[float, ...]:
    """Multipliers of the pole shift for each of the first m lower parameters.

    Parameters whose differences are integers form a group; members of a
    group receive distinct multiples 0, 1, 2, ... of the shift.
    """
    mult = [0.0] * len(bm)
    seen = [False] * len(bm)
    for i in range(len(bm)):
        if seen[i]:
            continue
        group = [i]
        for j in range(i + 1, len(bm)):
            d = bm[j] - bm[i]
            if not seen[j] and abs(d - round(d)) <= 1e-12 * max(1.0, abs(d)):
                group.append(j)
        for k, idx in enumerate(group):
            seen[idx] = True
            mult[idx] = float(k)
    return tuple(mult)


def _shifted(b, shifts, h):
    return tuple(v + s * h for v, s in zip(b, shifts)) + tuple(b[len(shifts):])


# -- double-precision residue series ---------------------------------------


def _log_abs_gamma(x):
    return special.gammaln(x), special.gammasgn(x)


def _family_coefficients(j, m, n, a, b, ks):
    """log|c_k|, sign(c_k) for residues at s = b_j + k; sign 0 marks c_k == 0."""
    bj = b[j]
    logc = -special.gammaln(ks + 1.0)
    sign = np.where(ks % 2 == 0, 1.0, -1.0)
    for i in range(m):
        if i == j:
            continue
        lg, sg = _log_abs_gamma(b[i] - bj - ks)
        logc += lg
        sign *= sg
    for i in range(n):
        lg, sg = _log_abs_gamma(1.0 - a[i] + bj + ks)
        logc += lg
        sign *= sg
    for x in [1.0 - b[i] + bj + ks for i in range(m, len(b))] + \
             [a[i] - bj - ks for i in range(n, len(a))]:
        pole = (x <= 0.0) & (x == np.floor(x))
        lg, sg = _log_abs_gamma(np.where(pole, 1.0, x))
        logc -= lg
        sign = np.where(pole, 0.0, sign * sg)
    return logc, sign


def _series_float(m, n, a, b, z):
    """Residue series in double precision.

    Returns the value and an error estimate (round-off plus truncation);
    the estimate is ``inf`` where the terms overflow.
    """
    lnz = np.log(z)
    q_minus_p = len(b) - len(a)
    pmax = max([abs(x) for x in (*a, *b)] + [1.0])
    families = []
    for j in range(m):
        k0 = 0
        logs, signs = [], []
        peak = np.full(z.shape, -np.inf)
        while True:
            ks = np.arange(k0, k0 + _BATCH, dtype=float)
            logc, sg = _family_coefficients(j, m, n, a, b, ks)
            lt = logc[None, :] + (b[j] + ks)[None, :] * lnz[:, None]
            lt[:, sg == 0.0] = -np.inf
            logs.append(lt)
            signs.append(sg)
            k0 += _BATCH
            peak = np.maximum(peak, lt.max(axis=1))
            tail = lt[:, -3:]
            small = np.all(tail < peak[:, None] + math.log(1e-18), axis=1)
            ratio = tail[:, -1] - tail[:, -2]
            geometric = (ratio < math.log(0.5)) | ~np.isfinite(tail[:, -1])
            if k0 > pmax + 3 and np.all((small & geometric) | ~np.isfinite(peak)):
                break
            if q_minus_p == 0 and np.all(small):
                break
            if k0 >= _MAX_TERMS:
                raise UnsupportedInstance(
                    f"residue series did not settle within {_MAX_TERMS} terms"
                )
        families.append((logs, signs, peak))
    ref = np.max([pk for _, _, pk in families], axis=0)
    finite = np.isfinite(ref)
    ref = np.where(finite, ref, 0.0)
    s = np.zeros_like(z)
    mag = np.zeros_like(z)
    for logs, signs, _ in families:
        for lt, sg in zip(logs, signs):
            w = np.exp(lt - ref[:, None])
            s += w @ sg
            mag += w.sum(axis=1)
    scale = np.exp(np.minimum(ref, 700.0))
    val = np.where(finite, s * scale, 0.0)
    err = np.where(finite, 64.0 * _EPS * mag * scale, 0.0)
    err[finite & (ref >= 700.0)] = np.inf
    return val, err


def _richardson(v1, v2, v3):
    """Combine values at shifts h, h/2, h/4 into an O(h^3) estimate."""
    r1 = 2.0 * v2 - v1
    r2 = 2.0 * v3 - v2
    return (4.0 * r2 - r1) / 3.0, abs(r2 - r1)


def _series_float_extrapolated(m, n, a, b, z, shifts, h):
    if not any(shifts):
        return _series_float(m, n, a, b, z)
    runs = [_series_float(m, n, a, _shifted(b, shifts, h / f), z) for f in (1.0, 2.0, 4.0)]
    val, gap = _richardson(*(v for v, _ in runs))
    rounding = runs[0][1] + 6.0 * runs[1][1] + 8.0 * runs[2][1]
    return val, gap + rounding


# -- Mellin-Barnes contour quadrature --------------------------------------


def _mellin_barnes_float(m, n, a, b, z):
    """Trapezoidal rule for the Mellin-Barnes integral on Re(s) = c.

    ``c`` is chosen per argument near the real saddle of ``|phi(s) z^s|``
    inside the strip separating the pole families, which limits
    cancellation when ``G`` is much smaller than the integrand.  Returns
    ``None`` when no straight contour separates the families or the
    integrand does not decay along it.
    """
    p, q = len(a), len(b)
    decay = m + n - 0.5 * (p + q)
    if decay <= 0.0:
        return None
    left = max([ai - 1.0 for ai in a[:n]], default=-math.inf)
    right = min(b[:m])
    if not left < right:
        return None

    def log_phi(s):
        acc = np.zeros_like(s, dtype=complex)
        for bj in b[:m]:
            acc += special.loggamma(bj - s)
        for ai in a[:n]:
            acc += special.loggamma(1.0 - ai + s)
        for bj in b[m:]:
            acc -= special.loggamma(1.0 - bj + s)
        for ai in a[n:]:
            acc -= special.loggamma(ai - s)
        return acc

    z = np.asarray(z, dtype=float)
    lnz = np.log(z)
    if math.isinf(left):
        lo_c = right - 80.0
    else:
        lo_c = left + min(0.25, 0.5 * (right - left))
    hi_c = right - min(0.25, 0.5 * (right - left))
    if math.isinf(left):
        grid = np.unique(np.concatenate([np.linspace(lo_c, hi_c, 64), [right - 0.5]]))
    else:
        grid = np.unique(np.concatenate([np.linspace(lo_c, hi_c, 16), [0.5 * (left + right)]]))
    lp_grid = log_phi(grid.astype(complex)).real
    score = lp_grid[None, :] + grid[None, :] * lnz[:, None]
    pick = np.argmin(score, axis=1)
    val = np.empty(z.shape)
    err = np.empty(z.shape)
    for g in np.unique(pick):
        sel = pick == g
        out = _mb_line(log_phi, float(grid[g]), left, right, decay, lnz[sel])
        if out is None:
            return None
        val[sel], err[sel] = out
    return val, err


def _mb_line(log_phi, c, left, right, decay, lnz):
    d = min(c - left, right - c, 0.5)
    # integrand decays like exp(-pi*decay*|t|) times a power of |t|
    span = 1.0
    lp0 = log_phi(np.array([c + 0j]))[0].real
    while span < 4000.0:
        if log_phi(np.array([c + 1j * span]))[0].real < lp0 - 45.0 and span * math.pi * decay > 45.0:
            break
        span *= 1.5
    else:
        return None
    lnz_max = float(np.max(np.abs(lnz)))
    h = 2.0 * math.pi * d / (40.0 + d * lnz_max)
    nodes = int(math.ceil(span / h))
    t = np.arange(nodes + 1) * h
    lp = log_phi(c + 1j * t)
    wt = np.full(t.shape, h)
    wt[0] = 0.5 * h
    # integrand at t and -t are conjugate for real parameters and z
    expo = lp[None, :] + (c + 1j * t)[None, :] * lnz[:, None]
    terms = np.exp(expo)
    full = (terms.real * wt[None, :]).sum(axis=1) / math.pi
    half = (terms.real[:, ::2] * (2.0 * wt[None, ::2])).sum(axis=1) / math.pi
    absum = (np.abs(terms) * wt[None, :]).sum(axis=1) / math.pi
    # geometric convergence in 1/h: the fine-rule error is about the square
    # of the coarse-rule error relative to the integrand scale
    gap = np.abs(full - half)
    err = gap * np.minimum(1.0, gap / np.maximum(absum, np.finfo(float).tiny)) + 256.0 * _EPS * absum
    return full, err


# -- arbitrary-precision residue series -------------------------------------


def _series_mp(m, n, a, b, z, shifts, h, rtol, atol):
    if not any(shifts):
        return float(_series_mp_once(m, n, a, b, z, rtol, atol))
    vals = [_series_mp_once(m, n, a, _shifted(b, shifts, h / f), z, rtol, atol)
            for f in (1, 2, 4)]
    return float(_richardson(*vals)[0])


def _series_mp_once(m, n, a, b, z, rtol, atol):
    dps = int(math.ceil(-math.log10(rtol))) + 20
    while True:
        ctx = mpmath.MPContext()
        ctx.dps = dps
        val, absum = _mp_sum(ctx, m, n, a, b, z)
        if absum == 0:
            return val
        tol = max(rtol * abs(val), ctx.mpf(atol))
        # rounding error is about absum * 10**-dps
        need = float(ctx.log10(absum / tol)) + 5 if tol > 0 else 2 * dps
        if dps >= need:
            return val
        dps = int(need) + 10
        if dps > 3000:
            raise UnsupportedInstance("cancellation in residue series beyond 3000 digits")


def _mp_sum(ctx, m, n, a, b, z):
    A = [ctx.mpf(v) for v in a]
    B = [ctx.mpf(v) for v in b]
    zz = ctx.mpf(z)
    p, q = len(A), len(B)
    total = ctx.mpf(0)
    absum = ctx.mpf(0)
    pmax = max([abs(float(x)) for x in (*a, *b)] + [1.0])

    def direct(j, k):
        bj = B[j]
        c = (-1) ** k / ctx.factorial(k)
        for i in range(m):
            if i != j:
                c *= ctx.gamma(B[i] - bj - k)
        for i in range(n):
            c *= ctx.gamma(1 - A[i] + bj + k)
        for i in range(m, q):
            c *= ctx.rgamma(1 - B[i] + bj + k)
        for i in range(n, p):
            c *= ctx.rgamma(A[i] - bj - k)
        return c

    for j in range(m):
        bj = B[j]
        c = direct(j, 0)
        zk = zz ** bj
        peak = ctx.mpf(0)
        small_run = 0
        k = 0
        while True:
            t = c * zk
            total += t
            at = abs(t)
            absum += at
            peak = max(peak, at)
            if at <= peak * ctx.mpf(10) ** (-(ctx.dps + 2)):
                small_run += 1
            else:
                small_run = 0
            # ratio c_{k+1}/c_k, falling back to direct evaluation at zeros
            ratio = ctx.mpf(-1) / (k + 1)
            degenerate = c == 0
            for i in range(m):
                if i != j:
                    ratio /= B[i] - bj - k - 1
            for i in range(n):
                ratio *= 1 - A[i] + bj + k
            for i in range(m, q):
                den = 1 - B[i] + bj + k
                if den == 0:
                    degenerate = True
                    break
                ratio /= den
            for i in range(n, p):
                ratio *= A[i] - bj - k - 1
            k += 1
            c = direct(j, k) if degenerate else c * ratio
            zk *= zz
            if k > pmax + 3 and small_run >= 3 and abs(ratio * zz) < 0.5:
                break
            if k >= _MAX_TERMS:
                raise UnsupportedInstance(
                    f"residue series did not settle within {_MAX_TERMS} terms"
                )
    return total, absum
