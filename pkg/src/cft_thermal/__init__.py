"""Thermal equilibrium states of chiral conformal field theories, numerically.

The package evaluates the KMS states of the U(1) current and related chiral
models on smooth test functions and checks their defining identities.
"""

from .oneparticle import ThermalParams
from .sigfn import (AccuracyWarning, Diffeomorphism, DomainError, GridFunction,
                    SpectralFunction)

__all__ = [
    "AccuracyWarning",
    "Diffeomorphism",
    "DomainError",
    "GridFunction",
    "SpectralFunction",
    "ThermalParams",
]
__version__ = "0.1.0"
