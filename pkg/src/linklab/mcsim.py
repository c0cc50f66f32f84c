"""Monte Carlo estimation of outage probability and DPSK BER.

Trials are split into fixed-size chunks.  Chunk ``k`` draws from a Philox
stream keyed by ``SeedSequence(master_seed, spawn_key=(k,))``, so a chunk's
output depends only on ``(cfg, opts, k)``.  Chunk partial sums are reduced
in chunk order with ``math.fsum``, which makes the estimate independent of
how many workers evaluated the chunks.

BER is estimated semi-analytically as the mean of ``0.5 * exp(-g_end)``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .analytic import MetricKind
from .channels import sample_snr
from .linkmodel import SystemConfig, end_to_end_snr, end_to_end_snr_min_approx

__all__ = [
    "CombiningMode",
    "McOptions",
    "McEstimate",
    "chunk_rng",
    "run_mc",
    "run_outage_mc",
    "run_ber_mc",
]


class CombiningMode(str, enum.Enum):
    EXACT = "exact"
    MIN_APPROX = "min"


@dataclass(frozen=True)
class McOptions:
    """Simulation controls.

    ``combining_mode`` selects the exact adaptive-gain combiner or its
    ``min`` approximation; it is ignored for fixed gain.  ``workers`` only
    affects wall time, never the result.
    """

    trials: int = 1_000_000
    master_seed: int = 20240601
    chunk_size: int = 65536
    combining_mode: CombiningMode = CombiningMode.EXACT
    workers: int = 1

    def __post_init__(self):
        for name in ("trials", "chunk_size", "workers"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v or v < 1:
                raise ValueError(f"{name} must be a positive integer, got {v!r}")
            object.__setattr__(self, name, int(v))
        seed = int(self.master_seed)
        if not 0 <= seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")
        object.__setattr__(self, "master_seed", seed)
        object.__setattr__(self, "combining_mode", CombiningMode(self.combining_mode))


@dataclass(frozen=True)
class McEstimate:
    trials: int
    estimate: float
    std_error: float
    master_seed: int
    metric_kind: MetricKind

    @property
    def ci_half_width(self) -> float:
        """Half width of the 95% normal-approximation interval."""
        return 1.96 * self.std_error


def chunk_rng(master_seed: int, k: int) -> np.random.Generator:
    """Independent counter-based stream for chunk ``k``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(k,))
    return np.random.Generator(np.random.Philox(ss))


def _end_snr(cfg: SystemConfig, mode: CombiningMode, g_fso, g_rf):
    if not cfg.is_fixed and mode is CombiningMode.MIN_APPROX:
        return end_to_end_snr_min_approx(g_fso, g_rf)
    return end_to_end_snr(cfg.relay, g_fso, g_rf)


def _chunk(args):
    cfg, opts, k, n, end_snr_fn = args
    rng = chunk_rng(opts.master_seed, k)
    g_rf = sample_snr(cfg.rf, rng, (n, cfg.n_users)).max(axis=1)
    g_fso = sample_snr(cfg.fso, rng, n)
    if end_snr_fn is None:
        g = _end_snr(cfg, opts.combining_mode, g_fso, g_rf)
    else:
        g = np.broadcast_to(np.asarray(end_snr_fn(g_fso, g_rf), dtype=float), (n,))
    hits = int(np.count_nonzero(g <= cfg.gamma_th))
    pe = 0.5 * np.exp(-g)
    return hits, math.fsum(pe), math.fsum(pe * pe)


def _chunk_plan(opts: McOptions):
    full, rest = divmod(opts.trials, opts.chunk_size)
    sizes = [opts.chunk_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def run_mc(cfg: SystemConfig, opts: McOptions,
           end_snr_fn: Optional[Callable] = None) -> tuple[McEstimate, McEstimate]:
    """Outage and BER estimates from one shared set of trials.

    Parameters
    ----------
    end_snr_fn : callable, optional
        Replaces the relay combiner, ``end_snr_fn(g_fso, g_rf) -> g_end``.
        Intended for tests that need a known end-to-end SNR.
    """
    jobs = [(cfg, opts, k, n, end_snr_fn) for k, n in _chunk_plan(opts)]
    if opts.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=opts.workers) as ex:
            parts = list(ex.map(_chunk, jobs))
    else:
        parts = [_chunk(j) for j in jobs]
    n = opts.trials
    hits = sum(p[0] for p in parts)
    s1 = math.fsum(p[1] for p in parts)
    s2 = math.fsum(p[2] for p in parts)
    p_out = hits / n
    se_out = math.sqrt(p_out * (1.0 - p_out) / n)
    mean = s1 / n
    var = max(s2 / n - mean * mean, 0.0) * n / max(n - 1, 1)
    se_ber = math.sqrt(var / n)
    return (McEstimate(n, p_out, se_out, opts.master_seed, MetricKind.OUTAGE),
            McEstimate(n, mean, se_ber, opts.master_seed, MetricKind.BER))


def run_outage_mc(cfg: SystemConfig, opts: McOptions, end_snr_fn=None) -> McEstimate:
    """Estimate ``Pr(g_end <= gamma_th)``."""
    return run_mc(cfg, opts, end_snr_fn)[0]


def run_ber_mc(cfg: SystemConfig, opts: McOptions, end_snr_fn=None) -> McEstimate:
    """Estimate the DPSK BER ``E[0.5 exp(-g_end)]``."""
    return run_mc(cfg, opts, end_snr_fn)[1]
