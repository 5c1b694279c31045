"""Set-valued derivatives of max-min functions along switched dynamics.

At a point x the admissible velocities form the convex hull of the
adjacent mode fields, parameterized by weights in the probability
simplex.  The set-valued Lie derivative keeps only the weights for
which every essentially-active base gradient sees the same directional
value; those weights solve a small homogeneous linear system on the
simplex.  The Clarke derivative drops that equalization and is the
full (more conservative) interval of gradient/velocity products.
"""

import itertools
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InternalCheckError, InvalidInputError
from .maxmin import active_indices
from .policy import DEFAULT_POLICY

EMPTY = "empty"
POINT = "point"
SEGMENT = "segment"
POLYTOPE = "polytope"
FULL = "full-simplex"


@dataclass(frozen=True)
class SimplexSet:
    """Solution set of the equalization system inside the simplex.

    ``vertices`` are the extreme points (weight vectors, nonnegative,
    summing to one); the set itself is their convex hull.
    """

    kind: str
    m: int
    vertices: tuple  # tuple of ndarray

    @property
    def is_empty(self):
        return self.kind == EMPTY


@dataclass(frozen=True)
class LieSet:
    """Closed interval of set-valued Lie derivative values, possibly empty.

    ``witness_lo`` / ``witness_hi`` are simplex weights attaining the
    endpoints.  The convention max(empty) = -inf is left to callers;
    emptiness is an explicit status, never a sentinel float.
    """

    empty: bool
    lo: float = 0.0
    hi: float = 0.0
    witness_lo: Optional[np.ndarray] = None
    witness_hi: Optional[np.ndarray] = None

    @classmethod
    def empty_set(cls):
        return cls(empty=True)


@dataclass(frozen=True)
class ClarkeSet:
    """Interval of all gradient/velocity products (always nonempty)."""

    lo: float
    hi: float


def _full_simplex(m):
    return SimplexSet(
        kind=FULL, m=m, vertices=tuple(np.eye(m)[j] for j in range(m))
    )


def lambda_set(gradients, fields, policy=DEFAULT_POLICY):
    """Simplex weights making all active gradients agree on the velocity.

    gradients: one n-vector per essentially-active base (p of them).
    fields:    one n-vector per adjacent mode (m of them).
    Solves the p-1 equations (g_{k+1} - g_k) . sum_j w_j f_j = 0 over the
    probability simplex.  Exact vertex enumeration for m <= 4; linear
    programming backs the query for larger m.
    """
    grads = [np.asarray(g, dtype=float) for g in gradients]
    flds = [np.asarray(f, dtype=float) for f in fields]
    p, m = len(grads), len(flds)
    if p < 1 or m < 1:
        raise InvalidInputError("lambda_set needs at least one gradient and field")
    if p == 1:
        return _full_simplex(m)

    C = np.array([[(grads[k + 1] - grads[k]) @ f for f in flds] for k in range(p - 1)])
    scale = max(1.0, float(np.abs(C).max()))
    tol = policy.abs_tol + policy.rel_tol * scale
    live = [k for k in range(p - 1) if np.abs(C[k]).max() > tol]
    if not live:
        return _full_simplex(m)
    C = C[live]

    if m <= 4:
        verts = _vertices_by_support(C, m, tol)
    else:
        verts = _vertices_by_lp(C, m)
    if not verts:
        return SimplexSet(kind=EMPTY, m=m, vertices=())
    if len(verts) == 1:
        kind = POINT
    elif len(verts) == 2:
        kind = SEGMENT
    else:
        kind = POLYTOPE
    return SimplexSet(kind=kind, m=m, vertices=tuple(verts))


def _vertices_by_support(C, m, tol):
    """Basic feasible solutions of {w >= 0, sum w = 1, C w = 0}."""
    rows = C.shape[0]
    verts = []
    for size in range(1, min(m, rows + 1) + 1):
        for support in itertools.combinations(range(m), size):
            E = np.vstack([np.ones((1, size)), C[:, support]])
            rhs = np.zeros(rows + 1)
            rhs[0] = 1.0
            if np.linalg.matrix_rank(E, tol=1e-12 * max(1.0, np.abs(E).max())) < size:
                continue
            sol, residual, _, _ = np.linalg.lstsq(E, rhs, rcond=None)
            if np.abs(E @ sol - rhs).max() > tol:
                continue
            if sol.min() < -max(tol, 1e-12):
                continue
            w = np.zeros(m)
            w[list(support)] = np.clip(sol, 0.0, None)
            w /= w.sum()
            if not any(np.abs(w - v).max() <= 1e-9 for v in verts):
                verts.append(w)
    return verts


def _vertices_by_lp(C, m):
    """LP feasibility plus coordinate-extreme witnesses for m > 4."""
    from scipy.optimize import linprog

    A_eq = np.vstack([np.ones((1, m)), C])
    b_eq = np.zeros(A_eq.shape[0])
    b_eq[0] = 1.0
    verts = []
    for j in range(m):
        for sign in (1.0, -1.0):
            c = np.zeros(m)
            c[j] = sign
            res = linprog(c, A_eq=A_eq, b_eq=b_eq, bounds=[(0, 1)] * m, method="highs")
            if res.status == 0:
                w = np.clip(res.x, 0.0, None)
                w /= w.sum()
                if not any(np.abs(w - v).max() <= 1e-9 for v in verts):
                    verts.append(w)
    return verts


def lie_derivative(spec, basis, sys, x, policy=DEFAULT_POLICY):
    """Set-valued Lie derivative of the max-min function along the system."""
    x = np.asarray(x, dtype=float)
    act = active_indices(spec, basis, x, policy)
    idx = sys.index_set(x, policy)
    grads = [basis.gradient(k, x) for k in act.indices]
    flds = [sys.field(i, x) for i in idx]
    lam = lambda_set(grads, flds, policy)
    if lam.is_empty:
        return LieSet.empty_set()

    objectives = np.array([[g @ f for f in flds] for g in grads])
    scale = max(1.0, float(np.abs(objectives).max()))
    tol = 100.0 * (policy.abs_tol + policy.rel_tol * scale)
    values = []
    for w in lam.vertices:
        per_grad = objectives @ w
        if per_grad.max() - per_grad.min() > tol:
            raise InternalCheckError(
                "active gradients disagree on an equalized velocity "
                f"(spread {per_grad.max() - per_grad.min():.3e}); "
                "the essentially-active set is over-approximated"
            )
        values.append(float(per_grad[0]))
    values = np.array(values)
    i_lo, i_hi = int(values.argmin()), int(values.argmax())
    return LieSet(
        empty=False,
        lo=float(values[i_lo]),
        hi=float(values[i_hi]),
        witness_lo=lam.vertices[i_lo],
        witness_hi=lam.vertices[i_hi],
    )


def clarke_derivative(spec, basis, sys, x, policy=DEFAULT_POLICY):
    """Interval of products between gradient vertices and field vertices."""
    x = np.asarray(x, dtype=float)
    act = active_indices(spec, basis, x, policy)
    idx = sys.index_set(x, policy)
    products = [
        float(basis.gradient(k, x) @ sys.field(i, x))
        for k in act.indices
        for i in idx
    ]
    return ClarkeSet(lo=min(products), hi=max(products))


@dataclass
class DecreaseEntry:
    x: np.ndarray
    value: Optional[float]  # None encodes max(empty) = -inf
    bound: float
    ok: bool


@dataclass
class DecreaseReport:
    mode: str  # "lie" | "clarke"
    rate: float
    entries: list

    @property
    def violations(self):
        return [e for e in self.entries if not e.ok]

    @property
    def ok(self):
        return not self.violations


def decrease_check(spec, basis, sys, samples, rate, policy=DEFAULT_POLICY, use_clarke=False):
    """Sampled decrease test: max derivative vs -rate*|x|^2 per point.

    In Lie mode an empty derivative set counts as -inf and never
    violates; the Clarke variant reproduces the conservative test.
    """
    samples = [np.asarray(s, dtype=float) for s in samples]
    samples = [s for s in samples if float(s @ s) > 0.0]
    if not samples:
        raise InvalidInputError("decrease_check: empty sample set")
    entries = []
    for x in samples:
        bound = -rate * float(x @ x)
        if use_clarke:
            val = clarke_derivative(spec, basis, sys, x, policy).hi
            ok = val <= bound
            entries.append(DecreaseEntry(x=x, value=val, bound=bound, ok=ok))
        else:
            lie = lie_derivative(spec, basis, sys, x, policy)
            if lie.empty:
                entries.append(DecreaseEntry(x=x, value=None, bound=bound, ok=True))
            else:
                entries.append(
                    DecreaseEntry(x=x, value=lie.hi, bound=bound, ok=lie.hi <= bound)
                )
    return DecreaseReport(
        mode="clarke" if use_clarke else "lie", rate=rate, entries=entries
    )


def sphere_points(dim, n, rng, radius=1.0):
    """n points on the sphere of the given radius (seeded)."""
    pts = rng.standard_normal((n, dim))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return radius * pts


def planar_sign_criterion(g1, g2, f1, f2):
    """Two-gradient/two-field emptiness test: the equalizing weight
    exists iff the normal components of the two fields do not point to
    the same side, i.e. the product below is <= 0."""
    d = np.asarray(g1, dtype=float) - np.asarray(g2, dtype=float)
    return float(d @ np.asarray(f1, dtype=float)) * float(d @ np.asarray(f2, dtype=float))
