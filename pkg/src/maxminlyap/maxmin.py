"""Max-min combinations of smooth base functions.

A candidate Lyapunov function is built from K base functions as a
max-over-families of min-over-indices

    V(x) = max_j min_{k in S_j} V_k(x),

or the dual min-of-max form.  This module evaluates such functions,
converts between the two polarities, locates the single active base on
each strict-ordering cone (the selection map over permutations), and
computes essentially-active index sets together with the generalized
gradient vertices they induce.
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .policy import DEFAULT_POLICY
from .sysdsl import expr as ex

MAXMIN = "maxmin"
MINMAX = "minmax"


@dataclass(frozen=True)
class MaxMinSpec:
    """Combinatorial structure (K, S_1..S_J) of a max-min function."""

    K: int
    families: tuple  # tuple of tuples of 1-based base indices
    polarity: str = MAXMIN

    def __post_init__(self):
        if self.K < 1:
            raise InvalidInputError("K must be at least 1")
        if self.polarity not in (MAXMIN, MINMAX):
            raise InvalidInputError(f"unknown polarity {self.polarity!r}")
        if len(self.families) < 1:
            raise InvalidInputError("at least one family is required")
        norm = []
        for fam in self.families:
            if len(fam) == 0:
                raise InvalidInputError("families must be nonempty")
            if any(not 1 <= k <= self.K for k in fam):
                raise InvalidInputError(f"family {fam} out of range 1..{self.K}")
            norm.append(tuple(sorted(set(fam))))
        object.__setattr__(self, "families", tuple(norm))

    @property
    def J(self):
        return len(self.families)


class QuadraticBasis:
    """K symmetric matrices; base k is the quadratic form x^T P_k x."""

    def __init__(self, matrices):
        self.matrices = [np.asarray(P, dtype=float) for P in matrices]
        if not self.matrices:
            raise InvalidInputError("empty basis")
        n = self.matrices[0].shape[0]
        for P in self.matrices:
            if P.shape != (n, n):
                raise InvalidInputError("basis matrices must share one dimension")
        self.dim = n

    @property
    def K(self):
        return len(self.matrices)

    def values(self, x):
        x = np.asarray(x, dtype=float)
        return np.array([float(x @ P @ x) for P in self.matrices])

    def gradient(self, k, x):
        x = np.asarray(x, dtype=float)
        return 2.0 * (self.matrices[k - 1] @ x)


class ExprBasis:
    """K differentiable scalar expressions over x1..xn."""

    def __init__(self, exprs, dim):
        self.exprs = list(exprs)
        if not self.exprs:
            raise InvalidInputError("empty basis")
        self.dim = dim
        self._grads = [
            [ex.differentiate(e, v) for v in range(1, dim + 1)] for e in self.exprs
        ]

    @property
    def K(self):
        return len(self.exprs)

    def values(self, x):
        return np.array([ex.eval_expr(e, x) for e in self.exprs])

    def gradient(self, k, x):
        return np.array([ex.eval_expr(g, x) for g in self._grads[k - 1]])


def all_permutations(K):
    """All orderings of 1..K in lexicographic order."""
    return [tuple(p) for p in itertools.permutations(range(1, K + 1))]


def phi(spec, rho):
    """Active base index on the cone where the base values follow ``rho``.

    ``rho`` orders the base indices ascending by value.  Each family
    contributes its rho-earliest member (the family minimum); the
    function value is the rho-latest of those contributions.
    """
    if spec.polarity != MAXMIN:
        raise InvalidInputError("phi expects max-of-min polarity; dualize first")
    if tuple(sorted(rho)) != tuple(range(1, spec.K + 1)):
        raise InvalidInputError(f"{rho} is not a permutation of 1..{spec.K}")
    s_min = set()
    for fam in spec.families:
        for r in rho:
            if r in fam:
                s_min.add(r)
                break
    for r in reversed(rho):
        if r in s_min:
            return r
    raise AssertionError("unreachable: families are nonempty")


def dualize(spec):
    """Equivalent structure of the opposite polarity.

    Distributes min over max: one index is selected from every family,
    each selection becomes a family of the dual form, and dominated
    (superset) families are pruned.  Evaluation is pointwise identical.
    """
    selections = set()
    for choice in itertools.product(*spec.families):
        selections.add(tuple(sorted(set(choice))))
    pruned = [
        s
        for s in selections
        if not any(t != s and set(t) <= set(s) for t in selections)
    ]
    pruned.sort(key=lambda s: (len(s), s))
    flipped = MINMAX if spec.polarity == MAXMIN else MAXMIN
    return MaxMinSpec(K=spec.K, families=tuple(pruned), polarity=flipped)


def evaluate(spec, basis, x):
    """V(x): nested max/min of the base values."""
    vals = basis.values(x)
    return combine(spec, vals)


def combine(spec, vals):
    if spec.polarity == MAXMIN:
        return max(min(vals[k - 1] for k in fam) for fam in spec.families)
    return min(max(vals[k - 1] for k in fam) for fam in spec.families)


def equal_value_indices(spec, basis, x, policy=DEFAULT_POLICY):
    """Indices whose base value ties with V(x) (scale-aware tolerance)."""
    vals = basis.values(x)
    v = combine(spec, vals)
    tol = policy.abs_tol + policy.rel_tol * abs(v)
    return tuple(k for k in range(1, spec.K + 1) if abs(vals[k - 1] - v) <= tol), v


EXACT_SMOOTH = "exact-smooth"
EXACT_SWEEP = "exact-sweep"
PERTURBATION_SAMPLED = "perturbation-sampled"


@dataclass(frozen=True)
class ActiveSet:
    """Essentially-active base indices at a point, with the method used."""

    indices: tuple
    method: str
    warning: Optional[str] = None


@dataclass(frozen=True)
class GradientHull:
    """Vertices of the generalized gradient: one base gradient per
    essentially-active index; the gradient set is their convex hull."""

    indices: tuple
    vertices: tuple  # tuple of ndarray
    method: str
    warning: Optional[str] = None


def strict_ordering(vals):
    """Permutation sorting the values ascending, or None on any tie."""
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    if np.any(np.diff(sv) <= 0.0):
        return None
    return tuple(int(i) + 1 for i in order)


def _as_maxmin(spec):
    return spec if spec.polarity == MAXMIN else dualize(spec)


def active_indices(spec, basis, x, policy=DEFAULT_POLICY, n_directions=64):
    """Essentially-active index set.

    A unique value-tie is returned directly (the function is C^1 there).
    Otherwise the set is recovered from the selection map on the
    strict-ordering cones meeting x: exactly, by an angular sweep, for
    planar quadratic bases; by perturbation sampling on three small
    spheres everywhere else.
    """
    x = np.asarray(x, dtype=float)
    ties, _ = equal_value_indices(spec, basis, x, policy)
    if len(ties) == 1:
        return ActiveSet(indices=ties, method=EXACT_SMOOTH)
    mm = _as_maxmin(spec)
    if isinstance(basis, QuadraticBasis) and basis.dim == 2:
        got = _planar_sweep(mm, basis, x, policy)
        if got is not None:
            return got
    return _sampled_active(mm, basis, x, policy, n_directions)


def clarke_gradient(spec, basis, x, policy=DEFAULT_POLICY):
    """Generalized-gradient vertices {grad V_l(x) : l essentially active}."""
    act = active_indices(spec, basis, x, policy)
    verts = tuple(basis.gradient(k, x) for k in act.indices)
    return GradientHull(
        indices=act.indices, vertices=verts, method=act.method, warning=act.warning
    )


# ---------------------------------------------------------------------------
# exact planar sweep


def _pair_root_angles(D, scale):
    """Angles in [0, pi) where u(t)^T D u(t) = 0 on the unit circle.

    Returns None when the difference form vanishes identically
    (degenerate basis pair).
    """
    a = 0.5 * (D[0, 0] - D[1, 1])
    b = D[0, 1]
    c = 0.5 * (D[0, 0] + D[1, 1])
    r = math.hypot(a, b)
    tiny = 1e-14 * max(1.0, scale)
    if r <= tiny:
        if abs(c) <= tiny:
            return None
        return []
    u = -c / r
    if abs(u) > 1.0:
        return []
    psi = math.atan2(b, a)
    delta = math.acos(max(-1.0, min(1.0, u)))
    roots = [(psi + delta) / 2.0, (psi - delta) / 2.0]
    return [t % math.pi for t in roots]


def _circ_dist(a, b):
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def _planar_sweep(mm, basis, x, policy):
    """Exact alpha_V for 2-D quadratic bases via root isolation on the circle.

    Active sets are constant on rays, so only the angle matters; the
    strict-ordering arcs adjacent to the point's direction determine the
    essentially-active set.  Returns None when a degenerate (identical)
    base pair makes the sweep unreliable.
    """
    scale = max(float(np.abs(P).max()) for P in basis.matrices)
    roots = []
    for i in range(basis.K):
        for j in range(i + 1, basis.K):
            got = _pair_root_angles(basis.matrices[i] - basis.matrices[j], scale)
            if got is None:
                return None
            roots.extend(got)

    def phi_at(theta):
        u = np.array([math.cos(theta), math.sin(theta)])
        rho = strict_ordering(basis.values(u))
        if rho is None:
            return None
        return phi(mm, rho)

    norm = float(np.linalg.norm(x))
    if norm <= policy.abs_tol:
        # whole-circle sweep: one sample inside every arc between roots
        angles = sorted(set(t % math.pi for t in roots))
        if not angles:
            samples = [0.0]
        else:
            samples = []
            ext = angles + [angles[0] + math.pi]
            for lo, hi in zip(ext[:-1], ext[1:]):
                if hi - lo > 1e-12:
                    samples.append(0.5 * (lo + hi))
        found = sorted({p for p in (phi_at(t) for t in samples) if p is not None})
        if not found:
            return None
        return ActiveSet(indices=tuple(found), method=EXACT_SWEEP)

    theta0 = math.atan2(x[1], x[0])
    gaps = [d for d in (_circ_dist(theta0, t) for t in roots) if d > 1e-12]
    delta = min(min(gaps) / 2.0 if gaps else math.pi / 16.0, math.pi / 16.0)
    found = set()
    for _ in range(40):
        left = phi_at(theta0 - delta)
        right = phi_at(theta0 + delta)
        if left is not None and right is not None:
            found = {left, right}
            break
        delta /= 2.0
    if not found:
        return None
    return ActiveSet(indices=tuple(sorted(found)), method=EXACT_SWEEP)


# ---------------------------------------------------------------------------
# perturbation sampling


def _sampled_active(mm, basis, x, policy, n_directions):
    rng = np.random.default_rng(policy.seed)
    n = basis.dim
    dirs = rng.standard_normal((n_directions, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    base_r = policy.rel_tol * max(1.0, float(np.linalg.norm(x)))
    warning = None
    if isinstance(basis, QuadraticBasis):
        for i in range(basis.K):
            for j in range(i + 1, basis.K):
                if np.abs(basis.matrices[i] - basis.matrices[j]).max() == 0.0:
                    warning = f"bases {i + 1} and {j + 1} are identical"
    found = set()
    for mult in (1.0, 2.0, 4.0):
        r = base_r * mult
        for d in dirs:
            rho = strict_ordering(basis.values(x + r * d))
            if rho is not None:
                found.add(phi(mm, rho))
    if not found:
        # every sample tied (degenerate basis); fall back to the realized
        # active index so the set is never empty
        ties, _ = equal_value_indices(mm, basis, x, policy)
        found = {ties[0]}
        warning = warning or "perturbation sampling found no strict ordering"
    return ActiveSet(
        indices=tuple(sorted(found)), method=PERTURBATION_SAMPLED, warning=warning
    )
