"""Nonsmooth Lyapunov analysis for state-dependent switched systems.

The package builds Lyapunov candidates as max/min combinations of smooth
base functions (typically quadratic forms), computes their set-valued
derivatives along switched dynamics, simulates Filippov solutions with
sliding modes, and certifies global asymptotic stability of linear
switched systems over conic partitions via matrix-inequality checks.
"""

__version__ = "0.1.0"

from .policy import NumericPolicy
from .errors import (
    ConfigError,
    DomainEvalError,
    InternalCheckError,
    InvalidInputError,
    PartitionError,
)
from .maxmin import MaxMinSpec, QuadraticBasis, ExprBasis
from .inclusion import SwitchedSystem
from .setderiv import LieSet, ClarkeSet, lie_derivative, clarke_derivative
from .filippovsim import SimOptions, simulate
from .certifier import Candidate, certify

__all__ = [
    "NumericPolicy",
    "ConfigError",
    "DomainEvalError",
    "InternalCheckError",
    "InvalidInputError",
    "PartitionError",
    "MaxMinSpec",
    "QuadraticBasis",
    "ExprBasis",
    "SwitchedSystem",
    "LieSet",
    "ClarkeSet",
    "lie_derivative",
    "clarke_derivative",
    "SimOptions",
    "simulate",
    "Candidate",
    "certify",
]
