"""Amplitude models of simple, repeated and iterated quantum search."""

from . import grover, iterated, numerics, parallel_rs, perturbation, statevector
from .errors import BoundError, SymmetryError
from .traces import Trace

__all__ = [
    "BoundError",
    "SymmetryError",
    "Trace",
    "perturbation",
    "grover",
    "iterated",
    "numerics",
    "parallel_rs",
    "statevector",
]

__version__ = "0.1.0"
