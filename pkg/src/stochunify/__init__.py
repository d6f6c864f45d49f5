"""Stochastic-mechanics toolkit: Nelson diffusions, telegraph/Dirac lattices,
Riemann-Silberstein fields and helicity dynamics on spin networks."""

__version__ = "0.1.0"

from .errors import (
    CapacityError,
    ConfigError,
    DegenerateStateError,
    DimensionError,
    DomainError,
    NumericError,
    StabilityError,
    StochUnifyError,
)
from .numerics import ComplexField, Grid1D, RngStream
