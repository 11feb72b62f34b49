"""Rates and precoders for peak-constrained dirty paper channels with
grid-valued states, and the resulting two-user broadcast inner bound."""
from .core import DiscreteDistribution, DpcParams, GridAlphabet, esdu, mod_reduce, quantize
from .errors import (ConsistencyFailure, DirtyGridError, InsufficientSamples, InvalidParameter,
                     NumericalFailure)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyFailure", "DirtyGridError", "DiscreteDistribution", "DpcParams", "GridAlphabet",
    "InsufficientSamples", "InvalidParameter", "NumericalFailure", "esdu", "mod_reduce", "quantize",
]
