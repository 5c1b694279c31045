"""Switched-system model: regions, the closure index map, Filippov vertices.

A system is a finite list of modes, each with a vector field (a matrix
for linear modes, expressions otherwise) and a region where it is
active: a symmetric open cone {x : x^T Q x > 0}, a general analytic
sublevel region {x : H(x) > 0}, or the whole space.  The convexified
right-hand side at x is the hull of the fields of every mode whose
region closure contains x.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PartitionError
from .numkernel import as_square, as_symmetric
from .policy import DEFAULT_POLICY
from .sysdsl import expr as ex

CONE = "cone"
EXPR = "expr"
ALL = "all"


@dataclass
class Mode:
    index: int
    A: Optional[np.ndarray] = None
    f: Optional[tuple] = None
    Q: Optional[np.ndarray] = None
    H: Optional[ex.Expr] = None
    _grad_H: Optional[tuple] = None

    @property
    def region_kind(self):
        if self.Q is not None:
            return CONE
        if self.H is not None:
            return EXPR
        return ALL

    def field(self, x):
        if self.A is not None:
            return self.A @ np.asarray(x, dtype=float)
        return np.array([ex.eval_expr(c, x) for c in self.f])

    def region_value(self, x):
        if self.Q is not None:
            x = np.asarray(x, dtype=float)
            return float(x @ self.Q @ x)
        if self.H is not None:
            return ex.eval_expr(self.H, x)
        return np.inf

    def region_gradient(self, x):
        if self.Q is not None:
            return 2.0 * (self.Q @ np.asarray(x, dtype=float))
        if self.H is not None:
            return np.array([ex.eval_expr(g, x) for g in self._grad_H])
        return np.zeros(len(x))


@dataclass(frozen=True)
class FilippovSet:
    """Modes adjacent to x and the corresponding field vertices; the
    admissible velocity set is the convex hull of ``vertices``."""

    indices: tuple
    vertices: tuple


class SwitchedSystem:
    def __init__(self, dim, modes):
        self.dim = dim
        self.modes = list(modes)
        if not self.modes:
            raise InvalidInputError("a system needs at least one mode")
        for mode in self.modes:
            if mode.H is not None and mode._grad_H is None:
                mode._grad_H = tuple(
                    ex.differentiate(mode.H, v) for v in range(1, dim + 1)
                )

    @property
    def M(self):
        return len(self.modes)

    @classmethod
    def from_config(cls, system_config):
        modes = []
        for mc in system_config.modes:
            Q = None if mc.Q is None else as_symmetric(mc.Q, f"Q{mc.index}")
            A = None if mc.A is None else as_square(mc.A, f"A{mc.index}")
            modes.append(Mode(index=mc.index, A=A, f=mc.f, Q=Q, H=mc.H))
        return cls(dim=system_config.dim, modes=modes)

    @classmethod
    def linear(cls, A_list, Q_list=None):
        """Linear modes with optional conic regions (None entries mean R^n)."""
        n = np.asarray(A_list[0]).shape[0]
        modes = []
        for i, A in enumerate(A_list, start=1):
            Q = None
            if Q_list is not None and Q_list[i - 1] is not None:
                Q = as_symmetric(Q_list[i - 1], f"Q{i}")
            modes.append(Mode(index=i, A=as_square(A, f"A{i}"), Q=Q))
        return cls(dim=n, modes=modes)

    @property
    def is_linear(self):
        return all(m.A is not None for m in self.modes)

    @property
    def is_conic(self):
        return all(m.region_kind in (CONE, ALL) for m in self.modes)

    def field(self, i, x):
        return self.modes[i - 1].field(x)

    def index_set(self, x, policy=DEFAULT_POLICY):
        """Modes whose region closure contains x, with a relative
        boundary band so exact-zero tests are never required."""
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise InvalidInputError("index_set: point has non-finite entries")
        norm2 = float(x @ x)
        out = []
        for mode in self.modes:
            kind = mode.region_kind
            if kind == ALL:
                out.append(mode.index)
            elif kind == CONE:
                if mode.region_value(x) >= -policy.abs_tol * norm2:
                    out.append(mode.index)
            else:
                band = policy.abs_tol * max(1.0, norm2)
                if mode.region_value(x) >= -band:
                    out.append(mode.index)
        if not out:
            raise PartitionError(
                f"no region contains {x.tolist()}; the partition does not cover"
            )
        return tuple(out)

    def filippov_set(self, x, policy=DEFAULT_POLICY):
        idx = self.index_set(x, policy)
        return FilippovSet(
            indices=idx, vertices=tuple(self.field(i, x) for i in idx)
        )

    def validate_partition(self, policy=DEFAULT_POLICY, n_samples=10_000, radii=(1.0,)):
        """Sampled check of the covering / non-overlap assumption.

        Returns (violations, checked) where violations is a list of
        (point, strict_members) for samples inside more than one open
        region or inside none and away from every boundary.
        """
        rng = np.random.default_rng(policy.seed)
        dirs = rng.standard_normal((n_samples, self.dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        violations = []
        checked = 0
        for radius in radii:
            for d in dirs:
                x = radius * d
                norm2 = radius * radius
                strict = []
                near_boundary = False
                for mode in self.modes:
                    if mode.region_kind == ALL:
                        strict.append(mode.index)
                        continue
                    v = mode.region_value(x)
                    band = (
                        policy.abs_tol * norm2
                        if mode.region_kind == CONE
                        else policy.abs_tol * max(1.0, norm2)
                    )
                    if v > band:
                        strict.append(mode.index)
                    elif abs(v) <= band:
                        near_boundary = True
                checked += 1
                if len(strict) > 1 or (not strict and not near_boundary):
                    violations.append((x, tuple(strict)))
        return violations, checked
