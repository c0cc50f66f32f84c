"""Outage probability and DPSK BER of a dual-hop multiuser RF/FSO relay link.

Submodules
----------
specfun     log-gamma and a Meijer-G evaluator
channels    per-link SNR distributions and samplers
linkmodel   best-user selection and relay SNR combining
quadrature  double-exponential rules used by the numerical oracles
analytic    closed forms, quadrature oracles and the errata audit
mcsim       reproducible Monte Carlo estimates
cli         configs, sweeps, CSV output and the ``linklab`` command
"""

__version__ = "0.1.0"
