"""Cycle-type statistics of uniform random permutations.

Exact laws in rational arithmetic (:mod:`cyclestats.exact`), special
functions and explicit bounds (:mod:`cyclestats.asymptotics`), total
variation against the Poisson model (:mod:`cyclestats.tvd`) and a seeded
sampler (:mod:`cyclestats.montecarlo`).
"""
from .core import (
    CONSTANTS,
    CycleType,
    DomainError,
    HypothesisError,
    IndexSet,
    Pmf,
    Rational,
    harmonic,
    harmonic_mass,
)

__version__ = "0.1.0"

__all__ = [
    "CONSTANTS",
    "CycleType",
    "DomainError",
    "HypothesisError",
    "IndexSet",
    "Pmf",
    "Rational",
    "harmonic",
    "harmonic_mass",
]
