"""Stability certification for linear switched systems on conic partitions.

Condition (i): on every cone where the candidate max-min function is
smooth and a single mode is active, the usual quadratic decrease must
hold.  This is certified through S-procedure matrix inequalities

    A_i^T P_F + P_F A_i + sum_k tau_k (P_u - P_w) + beta Q_i < 0,

one inequality per (mode, group of strict-ordering permutations),
where F is the base index selected on those cones and the difference
terms encode the ordering constraints valid there.  Permutations with
the same selected index are merged while their implied ordering
constraints share a common subset, which reproduces the small reduced
inequality families used in hand calculations.

Condition (ii) covers the points where both the partition and the
candidate are nonsmooth: in the plane, the switching lines are
extracted by factoring each cone matrix into a rank-two symmetric
outer product and checked one unit vector each; in R^n with two modes,
sliding is ruled out by sampling the sign product of the two normal
velocity components on the switching surface plus a full-rank test on
base differences.

The mode-to-permutation pairing assumes the candidate's active base
agrees with the active mode region ("matched" pairing, required for
partitions whose cones touch; the all-pairs alternative is available).
The assumption is validated by sampling and recorded in the
certificate, and any found candidate is always re-checked from scratch
by the pure margin computation.
"""

import itertools
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidInputError, PartitionError
from .maxmin import (
    MAXMIN,
    MaxMinSpec,
    QuadraticBasis,
    active_indices,
    all_permutations,
    dualize,
    phi,
    strict_ordering,
)
from .numkernel import eig_sym, negdef_margin, project_psd, solve_lyapunov
from .policy import DEFAULT_POLICY
from .setderiv import lambda_set

MAX_BASES = 6

VERDICT_GAS = "GAS-certified"
VERDICT_COND_I_ONLY = "condition-i-only"
VERDICT_NOT_CERTIFIED = "not-certified"


# ---------------------------------------------------------------------------
# inequality groups


@dataclass(frozen=True)
class Group:
    """One S-procedure inequality: mode, selected base, ordering terms."""

    mode: int
    phi_index: int
    perms: tuple  # permutations covered by this inequality
    diffs: tuple  # (u, w) pairs meaning a tau * (P_u - P_w) term
    use_cone: bool

    @property
    def key(self):
        return (self.mode, self.perms)


def _pairwise_diffs(rho):
    """Ordering constraints implied on the cone of rho: P_b - P_a > 0 for
    every pair placed a before b."""
    out = set()
    for ai in range(len(rho)):
        for bi in range(ai + 1, len(rho)):
            out.add((rho[bi], rho[ai]))
    return out


def _chain_diffs(rho):
    return tuple((rho[k + 1], rho[k]) for k in range(len(rho) - 1))


def build_groups(sys, spec, matching=None):
    """Inequality groups for condition (i).

    matching maps mode -> base index; only permutations selecting that
    base are paired with the mode (None pairs every permutation with
    every mode).  Within a mode, permutations with equal selected base
    are merged greedily in lexicographic order while the intersection
    of their implied ordering constraints stays nonempty; merged groups
    use that intersection, singleton groups use the adjacent chain.
    """
    mm = spec if spec.polarity == MAXMIN else dualize(spec)
    perms = all_permutations(mm.K)
    phis = {rho: phi(mm, rho) for rho in perms}
    groups = []
    for mode in sys.modes:
        i = mode.index
        use_cone = mode.region_kind == "cone"
        mine = [
            rho
            for rho in perms
            if matching is None or matching.get(i) == phis[rho]
        ]
        by_phi = {}
        for rho in mine:
            by_phi.setdefault(phis[rho], []).append(rho)
        for f_idx in sorted(by_phi):
            rhos = by_phi[f_idx]  # lexicographic (perms are generated sorted)
            start = 0
            while start < len(rhos):
                members = [rhos[start]]
                inter = _pairwise_diffs(rhos[start])
                stop = start + 1
                while stop < len(rhos):
                    cand = inter & _pairwise_diffs(rhos[stop])
                    if not cand:
                        break
                    inter = cand
                    members.append(rhos[stop])
                    stop += 1
                if len(members) == 1:
                    diffs = _chain_diffs(members[0])
                else:
                    diffs = tuple(sorted(inter))
                groups.append(
                    Group(
                        mode=i,
                        phi_index=f_idx,
                        perms=tuple(members),
                        diffs=diffs,
                        use_cone=use_cone,
                    )
                )
                start = stop
    return groups


# ---------------------------------------------------------------------------
# candidates and the pure margin check


@dataclass
class Candidate:
    """Basis matrices plus nonnegative multipliers keyed by group."""

    matrices: list
    taus: dict = field(default_factory=dict)  # group.key -> tuple of floats
    betas: dict = field(default_factory=dict)  # group.key -> float

    def tau_for(self, group):
        got = self.taus.get(group.key)
        if got is None:
            return (0.0,) * len(group.diffs)
        return tuple(got)

    def beta_for(self, group):
        return float(self.betas.get(group.key, 0.0))

    def scaled(self, c):
        return Candidate(
            matrices=[c * P for P in self.matrices],
            taus={k: tuple(c * t for t in v) for k, v in self.taus.items()},
            betas={k: c * v for k, v in self.betas.items()},
        )


def group_matrix(sys, cand, group):
    P = cand.matrices
    A = sys.modes[group.mode - 1].A
    F = P[group.phi_index - 1]
    M = A.T @ F + F @ A
    for tau, (u, w) in zip(cand.tau_for(group), group.diffs):
        M = M + tau * (P[u - 1] - P[w - 1])
    if group.use_cone:
        M = M + cand.beta_for(group) * sys.modes[group.mode - 1].Q
    return M


def derive_matching(sys, matrices, spec, policy=DEFAULT_POLICY, n_samples=2000):
    """Sampled mode -> active-base map, with the observation counts.

    Returns (matching or None, evidence dict).  None means some mode
    saw several active bases, so matched pairing is not sound for this
    candidate and all permutations must be paired with every mode.
    """
    mm = spec if spec.polarity == MAXMIN else dualize(spec)
    basis = QuadraticBasis(matrices)
    rng = np.random.default_rng(policy.seed)
    dirs = rng.standard_normal((n_samples, sys.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    seen = {m.index: set() for m in sys.modes}
    counted = 0
    for x in dirs:
        strict = [
            m.index
            for m in sys.modes
            if m.region_kind == "all" or m.region_value(x) > policy.abs_tol
        ]
        if len(strict) != 1:
            continue
        rho = strict_ordering(basis.values(x))
        if rho is None:
            continue
        seen[strict[0]].add(phi(mm, rho))
        counted += 1
    evidence = {
        "samples": counted,
        "seed": policy.seed,
        "observed": {i: tuple(sorted(s)) for i, s in seen.items()},
    }
    matching = {}
    for i, s in seen.items():
        if len(s) != 1:
            return None, evidence
        matching[i] = next(iter(s))
    return matching, evidence


@dataclass
class ConditionIReport:
    groups: list
    margins: list
    matching: Optional[dict]
    evidence: dict
    required_margin: float

    @property
    def ok(self):
        return all(m < -self.required_margin for m in self.margins)

    def margin_by_pair(self):
        out = {}
        for g, m in zip(self.groups, self.margins):
            for rho in g.perms:
                out[(g.mode, rho)] = m
        return out


def _require_linear_conic(sys):
    if not sys.is_linear:
        raise InvalidInputError("certification requires linear modes")
    if not sys.is_conic:
        raise InvalidInputError("certification requires conic (or all-space) regions")


def _validate_candidate(cand, K):
    """S-procedure soundness needs positive-definite bases and
    nonnegative multipliers; reject anything else outright."""
    if len(cand.matrices) != K:
        raise InvalidInputError(
            f"candidate has {len(cand.matrices)} bases, structure needs {K}"
        )
    for k, P in enumerate(cand.matrices, start=1):
        if negdef_margin(-np.asarray(P, dtype=float)) >= 0:
            raise InvalidInputError(f"candidate base {k} is not positive definite")
    for key, taus in cand.taus.items():
        if any(t < 0 for t in taus):
            raise InvalidInputError(f"negative ordering multiplier in group {key}")
    for key, beta in cand.betas.items():
        if beta < 0:
            raise InvalidInputError(f"negative cone multiplier in group {key}")


def check_condition_i(sys, spec, cand, policy=DEFAULT_POLICY, matching="auto"):
    """Pure margin computation for every inequality group (no optimization)."""
    _require_linear_conic(sys)
    if spec.K > MAX_BASES:
        raise InvalidInputError(
            f"K={spec.K} bases means {spec.K}! permutations; refusing beyond {MAX_BASES}"
        )
    _validate_candidate(cand, spec.K)
    if matching == "auto":
        matching, evidence = derive_matching(sys, cand.matrices, spec, policy)
    elif matching is None:
        evidence = {"samples": 0, "seed": policy.seed, "observed": {}}
    else:
        _, evidence = derive_matching(sys, cand.matrices, spec, policy)
    groups = build_groups(sys, spec, matching)
    margins = [negdef_margin(group_matrix(sys, cand, g)) for g in groups]
    return ConditionIReport(
        groups=groups,
        margins=margins,
        matching=matching,
        evidence=evidence,
        required_margin=policy.margin,
    )


# ---------------------------------------------------------------------------
# multiplier completion (convex in the multipliers for fixed P)


def _golden_min(f, lo, hi, iters=40):
    phi_r = (np.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - phi_r * (b - a)
    d = a + phi_r * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - phi_r * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + phi_r * (b - a)
            fd = f(d)
    xm = 0.5 * (a + b)
    return xm, f(xm)


def _optimize_group_multipliers(sys, cand, group, sweeps=3):
    """Coordinate descent on the group's multipliers; margin is convex in
    each scalar, so golden-section per coordinate converges cleanly."""
    taus = list(cand.tau_for(group))
    beta = cand.beta_for(group)
    n_slots = len(taus) + (1 if group.use_cone else 0)
    if n_slots == 0:
        return tuple(taus), beta

    def margin_at(ts, b):
        trial = Candidate(
            matrices=cand.matrices,
            taus={**cand.taus, group.key: tuple(ts)},
            betas={**cand.betas, group.key: b},
        )
        return negdef_margin(group_matrix(sys, trial, group))

    for _ in range(sweeps):
        for slot in range(len(taus)):

            def f(v, slot=slot):
                ts = list(taus)
                ts[slot] = v
                return margin_at(ts, beta)

            hi = max(10.0, 4.0 * abs(taus[slot]) + 1.0)
            while f(hi) < f(hi / 2.0) and hi < 1e6:
                hi *= 4.0
            v, _ = _golden_min(f, 0.0, hi)
            taus[slot] = v
        if group.use_cone:

            def fb(v):
                return margin_at(taus, v)

            hi = max(10.0, 4.0 * abs(beta) + 1.0)
            while fb(hi) < fb(hi / 2.0) and hi < 1e6:
                hi *= 4.0
            beta, _ = _golden_min(fb, 0.0, hi)
    return tuple(taus), beta


def complete_multipliers(sys, spec, cand, policy=DEFAULT_POLICY, matching="auto"):
    """Fill in multipliers for groups whose current margin is not strict."""
    report = check_condition_i(sys, spec, cand, policy, matching)
    out = Candidate(
        matrices=[np.array(P) for P in cand.matrices],
        taus=dict(cand.taus),
        betas=dict(cand.betas),
    )
    for g, m in zip(report.groups, report.margins):
        if m < -policy.margin:
            continue
        taus, beta = _optimize_group_multipliers(sys, out, g)
        out.taus[g.key] = taus
        out.betas[g.key] = beta
    return out


# ---------------------------------------------------------------------------
# feasibility search (alternating multiplier / basis blocks)


@dataclass(frozen=True)
class SearchOptions:
    seeds: int = 16
    max_rounds: int = 60
    p_steps: int = 30
    required_margin: float = 1e-6
    time_budget: float = 50.0
    seed: int = 0
    match_samples: int = 160  # per-mode directions enforcing the structure match


@dataclass
class SearchResult:
    candidate: Optional[Candidate]
    report: Optional[ConditionIReport]
    found: bool
    rounds: int
    elapsed: float
    message: str = ""


def _margin_subgradient(sys, cand, group):
    """Gradient matrices of the group's top eigenvalue w.r.t. each P."""
    M = group_matrix(sys, cand, group)
    spec = eig_sym(M)
    v = spec.eigenvectors[:, -1]
    A = sys.modes[group.mode - 1].A
    grads = [np.zeros_like(cand.matrices[0]) for _ in cand.matrices]
    av = A @ v
    grads[group.phi_index - 1] += np.outer(av, v) + np.outer(v, av)
    vv = np.outer(v, v)
    for tau, (u, w) in zip(cand.tau_for(group), group.diffs):
        grads[u - 1] += tau * vv
        grads[w - 1] -= tau * vv
    return float(spec.eigenvalues[-1]), grads


def _normalize(cand):
    """Rescale so the average basis trace is the dimension (margins are
    homogeneous under joint scaling, so this is verdict-neutral)."""
    n = cand.matrices[0].shape[0]
    total = sum(float(np.trace(P)) for P in cand.matrices)
    if total <= 0:
        return cand
    return cand.scaled(len(cand.matrices) * n / total)


class _MatchPenalty:
    """Sampled hinge penalty |V_target(x) - V(x)| over region interiors.

    A candidate only certifies when the base selected by the max-min
    combination on each region is the one paired with that region, so
    the basis update must be steered toward that pattern as well as
    toward negative margins.  Planar systems get a dense angular grid
    (regions are arcs); other dimensions use random sphere points.
    Counterexamples found by the validation sampler can be appended.
    """

    def __init__(self, sys, spec, matching, n_per_mode, seed):
        self.mm = spec if spec.polarity == MAXMIN else dualize(spec)
        self.matching = matching
        self.points = []  # (target base index, unit point)
        if sys.dim == 2:
            n_grid = max(720, 8 * n_per_mode)
            for k in range(n_grid):
                t = (k + 0.5) * np.pi / n_grid
                x = np.array([np.cos(t), np.sin(t)])
                owner = [
                    m.index
                    for m in sys.modes
                    if m.region_kind == "all" or m.region_value(x) > 0.0
                ]
                if len(owner) == 1:
                    self.points.append((matching[owner[0]], x))
        else:
            rng = np.random.default_rng(seed)
            per_mode = {m.index: 0 for m in sys.modes}
            tries = 0
            want = n_per_mode * sys.M
            while sum(per_mode.values()) < want and tries < 400 * want:
                tries += 1
                x = rng.standard_normal(sys.dim)
                x /= np.linalg.norm(x)
                owner = [
                    m.index
                    for m in sys.modes
                    if m.region_kind == "all" or m.region_value(x) > 1e-6
                ]
                if len(owner) == 1 and per_mode[owner[0]] < n_per_mode:
                    per_mode[owner[0]] += 1
                    self.points.append((matching[owner[0]], x))
        self._rebuild()

    def _rebuild(self):
        self.X = np.array([x for _, x in self.points])
        self.targets = np.array([t for t, _ in self.points], dtype=int)

    def add_counterexamples(self, pts):
        for target, x in pts:
            self.points.append((target, np.asarray(x, dtype=float)))
        self._rebuild()

    def value_and_grads(self, matrices):
        K = len(matrices)
        n = matrices[0].shape[0]
        X = self.X
        vals = np.stack([np.einsum("si,ij,sj->s", X, P, X) for P in matrices], axis=1)
        # realized active base per sample under the max-of-mins combination
        fam_min_val = []
        fam_min_idx = []
        for fam in self.mm.families:
            cols = np.array(fam) - 1
            sub = vals[:, cols]
            pos = np.argmin(sub, axis=1)
            fam_min_val.append(sub[np.arange(len(X)), pos])
            fam_min_idx.append(cols[pos] + 1)
        fam_min_val = np.stack(fam_min_val, axis=1)
        fam_min_idx = np.stack(fam_min_idx, axis=1)
        jstar = np.argmax(fam_min_val, axis=1)
        realized = fam_min_idx[np.arange(len(X)), jstar]
        v = fam_min_val[np.arange(len(X)), jstar]
        d = vals[np.arange(len(X)), self.targets - 1] - v
        pen = float(np.abs(d).sum()) / len(X)
        grads = [np.zeros((n, n)) for _ in range(K)]
        sign = np.sign(d)
        active = sign != 0.0
        if np.any(active):
            for k in range(1, K + 1):
                w_t = sign * (self.targets == k) - sign * (realized == k)
                rows = w_t != 0.0
                if np.any(rows):
                    Xw = X[rows] * w_t[rows, None]
                    grads[k - 1] += Xw.T @ X[rows]
            grads = [G / len(X) for G in grads]
        return pen, grads


def _initial_candidates(sys, spec, opts):
    """Deterministic seed list: per-mode Lyapunov solutions, then jitters."""
    rng = np.random.default_rng(opts.seed)
    n = sys.dim
    K = spec.K
    inits = []
    lyap = []
    for k in range(K):
        A = sys.modes[min(k, sys.M - 1)].A
        try:
            P = solve_lyapunov(A)
            if negdef_margin(-P) < 0:
                lyap.append(P)
            else:
                lyap.append(np.eye(n))
        except Exception:
            lyap.append(np.eye(n))
    inits.append([P.copy() for P in lyap])
    inits.append([np.eye(n) for _ in range(K)])
    for _ in range(max(0, opts.seeds - 2)):
        mats = []
        for k in range(K):
            B = rng.standard_normal((n, n))
            jitter = 0.5 * (B @ B.T) / n
            mats.append(lyap[k] + jitter + 0.05 * np.eye(n))
        inits.append(mats)
    return inits


def search_condition_i(sys, spec, policy=DEFAULT_POLICY, opts=None, matching="auto"):
    """Alternating feasibility search for condition (i).

    Blocks: (a) multipliers by per-group golden-section coordinate
    descent (convex for fixed bases); (b) basis matrices by projected
    subgradient on the worst inequality's top eigenvalue plus the
    structure-matching penalty, with a positive-definite floor and
    trace normalization.  Multi-start, budget-bounded.  Failure is a
    report, not an error: the inequalities are bilinear and a miss
    does not prove infeasibility.
    """
    _require_linear_conic(sys)
    opts = opts or SearchOptions()
    if matching == "auto":
        matching = (
            {m.index: m.index for m in sys.modes} if sys.M == spec.K else None
        )
    groups = build_groups(sys, spec, matching)
    penalty = (
        _MatchPenalty(sys, spec, matching, opts.match_samples, opts.seed)
        if matching is not None
        else None
    )
    t0 = time.monotonic()
    rounds_done = 0

    def margins_of(cand):
        return [negdef_margin(group_matrix(sys, cand, g)) for g in groups]

    def repair_matching(cand, max_steps=120):
        """Subgradient descent on the matching penalty until it hits zero."""
        if penalty is None:
            return True
        pen, grads = penalty.value_and_grads(cand.matrices)
        step = 0.2
        for _ in range(max_steps):
            if pen == 0.0:
                return True
            gnorm = np.sqrt(sum(float(np.sum(G * G)) for G in grads))
            if gnorm == 0.0:
                return False
            trial = [
                project_psd(P - (step / gnorm) * G, floor=1e-6)
                for P, G in zip(cand.matrices, grads)
            ]
            new_pen, _ = penalty.value_and_grads(trial)
            if new_pen < pen:
                cand.matrices = trial
                _normalize_inplace(cand)
                pen, grads = penalty.value_and_grads(cand.matrices)
                step = min(0.2, step * 1.5)
            else:
                step *= 0.5
                if step < 1e-9:
                    return False
        return pen == 0.0

    def optimize_rounds(cand):
        nonlocal rounds_done
        for round_no in range(opts.max_rounds):
            rounds_done += 1
            if time.monotonic() - t0 > opts.time_budget:
                return
            for g in groups:
                taus, beta = _optimize_group_multipliers(sys, cand, g, sweeps=2)
                cand.taus[g.key] = taus
                cand.betas[g.key] = beta
            if max(margins_of(cand)) <= -opts.required_margin:
                return
            # margin descent restricted to the matched set: a step that
            # breaks the matching is repaired or rolled back and shrunk
            step0 = 0.25 / (1.0 + round_no / 6.0)
            for _ in range(opts.p_steps):
                vals = [_margin_subgradient(sys, cand, g) for g in groups]
                worst = max(range(len(groups)), key=lambda j: vals[j][0])
                worst_margin = vals[worst][0]
                if worst_margin <= -opts.required_margin:
                    break
                grads = vals[worst][1]
                gnorm = np.sqrt(sum(float(np.sum(G * G)) for G in grads))
                if gnorm == 0.0:
                    break
                eta = step0 / gnorm
                saved = [P.copy() for P in cand.matrices]
                accepted = False
                while eta * gnorm > 1e-9:
                    cand.matrices = [
                        project_psd(P - eta * G, floor=1e-6)
                        for P, G in zip(saved, grads)
                    ]
                    _normalize_inplace(cand)
                    if repair_matching(cand, max_steps=20):
                        accepted = True
                        break
                    eta *= 0.25
                if not accepted:
                    cand.matrices = saved
                    return

    def counterexamples(cand, salt):
        """Strict-region points where the realized base differs from the
        declared matching, for counterexample-guided repair."""
        if matching is None:
            return []
        mm = spec if spec.polarity == MAXMIN else dualize(spec)
        basis = QuadraticBasis(cand.matrices)
        rng = np.random.default_rng(opts.seed + 7919 * salt)
        found = []
        for _ in range(2000):
            x = rng.standard_normal(sys.dim)
            x /= np.linalg.norm(x)
            strict = [
                m.index
                for m in sys.modes
                if m.region_kind == "all" or m.region_value(x) > policy.abs_tol
            ]
            if len(strict) != 1:
                continue
            rho = strict_ordering(basis.values(x))
            if rho is None:
                continue
            if phi(mm, rho) != matching[strict[0]]:
                found.append((matching[strict[0]], x))
                if len(found) >= 64:
                    break
        return found

    for init_no, mats in enumerate(_initial_candidates(sys, spec, opts)):
        cand = _normalize(Candidate(matrices=mats))
        for g in groups:
            cand.taus[g.key] = (0.0,) * len(g.diffs)
            cand.betas[g.key] = 0.0
        for outer in range(4):
            if time.monotonic() - t0 > opts.time_budget:
                break
            if not repair_matching(cand):
                break
            optimize_rounds(cand)
            report = check_condition_i(sys, spec, cand, policy, matching="auto")
            if report.ok and (matching is None or report.matching is not None):
                # headroom rescale so required margins survive reverification
                worst = max(report.margins)
                if worst > -opts.required_margin * 10 and worst < 0:
                    cand = cand.scaled(10.0 * opts.required_margin / -worst)
                    report = check_condition_i(sys, spec, cand, policy, matching="auto")
                if report.ok:
                    return SearchResult(
                        candidate=cand,
                        report=report,
                        found=True,
                        rounds=rounds_done,
                        elapsed=time.monotonic() - t0,
                    )
            ces = counterexamples(cand, salt=16 * init_no + outer)
            if not ces or penalty is None:
                break
            penalty.add_counterexamples(ces)
        if time.monotonic() - t0 > opts.time_budget:
            break
    return SearchResult(
        candidate=None,
        report=None,
        found=False,
        rounds=rounds_done,
        elapsed=time.monotonic() - t0,
        message="budget exhausted without a verified candidate "
        "(bilinear feasibility; not a proof of infeasibility)",
    )


def _normalize_inplace(cand):
    scaled = _normalize(cand)
    cand.matrices = scaled.matrices
    cand.taus = scaled.taus
    cand.betas = scaled.betas
    return cand


# ---------------------------------------------------------------------------
# planar condition (ii)


@dataclass(frozen=True)
class ConeFactors:
    """Chain factorization of a planar conic partition.

    thetas[i] is the normal of switching line i; the region of chain
    position i is
        Q_i = thetas[i] thetas[i+1]^T + thetas[i+1] thetas[i]^T
    and the cycle closes with theta_{M+1} = wrap_sign * theta_1.  The
    closure sign is a parity invariant of the partition: -1 for an
    even number of cones, +1 for an odd number (flipping any single
    normal flips two pairings, so the product of pairing signs cannot
    be chosen freely).  vs[i] is the unit vector spanning switching
    line i (the orthogonal complement of thetas[i]); order[i] is the
    mode index sitting at chain position i.
    """

    thetas: tuple
    vs: tuple
    order: tuple
    errors: tuple
    wrap_sign: float = -1.0


def q_cone_decompose(Q, policy=DEFAULT_POLICY):
    """Factor an indefinite 2x2 symmetric Q as t1 t2^T + t2 t1^T."""
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (2, 2):
        raise InvalidInputError("q_cone_decompose expects a 2x2 matrix")
    s = eig_sym(Q)
    lm, lp = float(s.eigenvalues[0]), float(s.eigenvalues[1])
    if not (lm < 0.0 < lp):
        raise InvalidInputError("cone matrix must be sign indefinite")
    vm = s.eigenvectors[:, 0]
    vp = s.eigenvectors[:, 1]
    eta = np.sqrt(-lm / (lp - lm))
    kappa = np.sqrt((lp - lm) / 2.0)
    t1 = kappa * (np.sqrt(1.0 - eta * eta) * vp - eta * vm)
    t2 = kappa * (np.sqrt(1.0 - eta * eta) * vp + eta * vm)
    rec = np.outer(t1, t2) + np.outer(t2, t1)
    err = float(np.abs(rec - Q).max())
    if err > 1e-10 * max(1.0, float(np.abs(Q).max())):
        raise PartitionError(f"cone factor reconstruction failed ({err:.2e})")
    return t1, t2


def _line_rep(v, tol=1e-9):
    """Canonical representative of a line through the origin (mod sign)."""
    u = np.asarray(v, dtype=float)
    u = u / np.linalg.norm(u)
    if u[0] < -tol or (abs(u[0]) <= tol and u[1] < 0):
        u = -u
    return (round(float(u[0]), 9), round(float(u[1]), 9))


def cone_chain(sys, policy=DEFAULT_POLICY):
    """Order the planar cones into the cyclic chain of switching lines.

    Walks the adjacency cycle (consecutive cones share a switching
    line), propagating exact factor scales; the cycle closes on the
    negated first normal, with the one-parameter scale freedom fixed
    for odd-length cycles.  Both walk orientations are attempted.
    """
    if sys.dim != 2:
        raise InvalidInputError("cone_chain is planar only")
    for m in sys.modes:
        if m.region_kind != "cone":
            raise InvalidInputError("cone_chain needs conic regions for every mode")
    M = sys.M
    if M == 1:
        raise PartitionError("a single cone cannot partition the plane")
    pairs = {}
    line_modes = {}
    for m in sys.modes:
        t1, t2 = q_cone_decompose(m.Q, policy)
        pairs[m.index] = (t1, t2)
        for t in (t1, t2):
            line_modes.setdefault(_line_rep(t), []).append(m.index)
    for rep, owners in line_modes.items():
        if len(owners) != 2:
            raise PartitionError(
                f"switching line {rep} belongs to {len(owners)} regions, expected 2"
            )

    def attempt(first, second):
        """Chain starting with theta_1 = first, walking toward `second`."""
        order = [1]
        thetas = [np.array(first, dtype=float)]
        carry = np.array(second, dtype=float)
        forward = _line_rep(second)
        entry = _line_rep(first)
        while len(order) < M:
            owners = line_modes[forward]
            nxt = owners[0] if owners[1] == order[-1] else owners[1]
            if nxt in order:
                return None
            order.append(nxt)
            thetas.append(carry)
            a, b = pairs[nxt]
            if _line_rep(a) == forward:
                shared, other = a, b
            elif _line_rep(b) == forward:
                shared, other = b, a
            else:
                return None
            scale = float(shared @ carry) / float(carry @ carry)
            carry = scale * other
            forward = _line_rep(other)
        if forward != entry:
            return None
        # closure: carry must land on the theta_1 line; the residual
        # ratio fixes the wrap sign (and the free scale for odd cycles)
        t1 = thetas[0]
        t1_hat = t1 / np.linalg.norm(t1)
        resid = carry - float(carry @ t1_hat) * t1_hat
        if np.abs(resid).max() > 1e-9 * max(1.0, float(np.abs(carry).max())):
            return None
        r = -float(carry @ t1) / float(t1 @ t1)  # carry == -r * theta_1
        if r == 0.0:
            return None
        if M % 2 == 1:
            gamma = np.sqrt(abs(r))  # odd cycles carry a free alternating scale
            thetas = [
                t * (gamma if pos % 2 == 0 else 1.0 / gamma)
                for pos, t in enumerate(thetas)
            ]
        elif abs(abs(r) - 1.0) > 1e-8:
            return None
        return order, thetas, (-1.0 if r > 0 else 1.0)

    a1, b1 = pairs[1]
    got = attempt(a1, b1) or attempt(b1, a1)
    if got is None:
        raise PartitionError(
            "cone chain closure failed: the partition is not a consistent cycle"
        )
    order, thetas, wrap_sign = got  # carry == wrap_sign * theta_1
    if thetas[0][0] < 0 or (thetas[0][0] == 0 and thetas[0][1] < 0):
        thetas = [-t for t in thetas]  # global flip preserves every product

    errors = []
    for pos in range(M):
        t_here = thetas[pos]
        t_next = wrap_sign * thetas[0] if pos == M - 1 else thetas[pos + 1]
        rec = np.outer(t_here, t_next) + np.outer(t_next, t_here)
        Q = sys.modes[order[pos] - 1].Q
        errors.append(float(np.abs(rec - Q).max()))
    if max(errors) > 1e-8 * max(1.0, max(float(np.abs(m.Q).max()) for m in sys.modes)):
        raise PartitionError(
            f"chain reconstruction error {max(errors):.2e} exceeds tolerance"
        )

    vs = []
    for t in thetas:
        v = np.array([-t[1], t[0]])
        v = v / np.linalg.norm(v)
        if v[0] < 0 or (v[0] == 0 and v[1] < 0):
            v = -v
        vs.append(v)
    return ConeFactors(
        thetas=tuple(thetas),
        vs=tuple(vs),
        order=tuple(order),
        errors=tuple(errors),
        wrap_sign=wrap_sign,
    )


@dataclass
class PlanarEntry:
    position: int
    v: np.ndarray
    modes: tuple  # (previous mode, next mode) adjacent to this line
    alpha: tuple
    lam_kind: str
    lam_vertices: tuple
    margin: Optional[float]
    ok: bool


@dataclass
class PlanarReport:
    factors: ConeFactors
    entries: list

    @property
    def ok(self):
        return all(e.ok for e in self.entries)


def planar_condition_ii(sys, spec, cand, policy=DEFAULT_POLICY):
    """Check the nonsmooth points of a planar conic partition.

    Each switching line contributes one unit vector v.  Where the
    candidate is smooth at v the entry passes vacuously; otherwise the
    equalizing weights for the two adjacent mode fields are computed,
    and if any exist the decrease of the first essentially-active base
    is required at every extreme weight.
    """
    _require_linear_conic(sys)
    factors = cone_chain(sys, policy)
    basis = QuadraticBasis(cand.matrices)
    M = sys.M
    entries = []
    for pos in range(M):
        v = factors.vs[pos]
        prev_mode = factors.order[pos - 1]  # wraps: line pos borders pos-1, pos
        here_mode = factors.order[pos]
        act = active_indices(spec, basis, v, policy)
        if len(act.indices) == 1:
            entries.append(
                PlanarEntry(
                    position=pos + 1,
                    v=v,
                    modes=(prev_mode, here_mode),
                    alpha=act.indices,
                    lam_kind="smooth",
                    lam_vertices=(),
                    margin=None,
                    ok=True,
                )
            )
            continue
        grads = [basis.gradient(k, v) for k in act.indices]
        fields = [sys.field(prev_mode, v), sys.field(here_mode, v)]
        lam = lambda_set(grads, fields, policy)
        if lam.is_empty:
            entries.append(
                PlanarEntry(
                    position=pos + 1,
                    v=v,
                    modes=(prev_mode, here_mode),
                    alpha=act.indices,
                    lam_kind="empty",
                    lam_vertices=(),
                    margin=None,
                    ok=True,
                )
            )
            continue
        l1 = act.indices[0]
        P = cand.matrices[l1 - 1]
        forms = [
            float(v @ (P @ sys.modes[m - 1].A + sys.modes[m - 1].A.T @ P) @ v)
            for m in (prev_mode, here_mode)
        ]
        worst = max(float(np.dot(forms, w)) for w in lam.vertices)
        entries.append(
            PlanarEntry(
                position=pos + 1,
                v=v,
                modes=(prev_mode, here_mode),
                alpha=act.indices,
                lam_kind=lam.kind,
                lam_vertices=lam.vertices,
                margin=worst,
                ok=worst < -policy.margin,
            )
        )
    return PlanarReport(factors=factors, entries=entries)


# ---------------------------------------------------------------------------
# two-mode condition (ii) in R^n


@dataclass
class ExclusionReport:
    min_product: float
    n_samples: int
    seed: int
    ok: bool


def sliding_exclusion(sys, policy=DEFAULT_POLICY, n_samples=10_000):
    """Sampled check that both mode fields cross the switching surface
    the same way: min over the surface of the product of normal
    components must stay positive."""
    _require_linear_conic(sys)
    if sys.M != 2:
        raise InvalidInputError("sliding_exclusion expects exactly two modes")
    Q1, Q2 = sys.modes[0].Q, sys.modes[1].Q
    if Q1 is None or Q2 is None:
        raise InvalidInputError("sliding_exclusion expects conic regions")
    if np.abs(Q1 + Q2).max() > 1e-9 * max(1.0, np.abs(Q1).max()):
        raise InvalidInputError("two-mode exclusion needs opposite cones +/-Q")
    Q = Q1
    s = eig_sym(Q)
    if np.abs(s.eigenvalues).min() <= policy.abs_tol:
        raise InvalidInputError("switching matrix Q must be invertible")
    neg = [k for k, w in enumerate(s.eigenvalues) if w < 0]
    pos = [k for k, w in enumerate(s.eigenvalues) if w > 0]
    if not neg or not pos:
        raise InvalidInputError("switching matrix Q must be sign indefinite")
    rng = np.random.default_rng(policy.seed)
    A1, A2 = sys.modes[0].A, sys.modes[1].A
    QA1 = Q @ A1
    QA2 = Q @ A2
    n = sys.dim
    min_product = np.inf
    for _ in range(n_samples):
        z = np.zeros(n)
        u = rng.standard_normal(len(pos))
        u /= np.linalg.norm(u)
        w = rng.standard_normal(len(neg))
        w /= np.linalg.norm(w)
        for j, k in enumerate(pos):
            z[k] = u[j] / np.sqrt(2.0 * s.eigenvalues[k])
        for j, k in enumerate(neg):
            z[k] = w[j] / np.sqrt(-2.0 * s.eigenvalues[k])
        x = s.eigenvectors @ z
        x /= np.linalg.norm(x)
        product = float(x @ QA1 @ x) * float(x @ QA2 @ x)
        if product < min_product:
            min_product = product
    return ExclusionReport(
        min_product=float(min_product),
        n_samples=n_samples,
        seed=policy.seed,
        ok=min_product > policy.margin,
    )


@dataclass
class TwoModeReport:
    exclusion: ExclusionReport
    rank_margins: dict  # (j1, j2) -> smallest singular value of P_j1 - P_j2

    @property
    def ok(self):
        return self.exclusion.ok and all(
            v > 0.0 for v in self.rank_margins.values()
        )


def check_condition_ii_2mode(sys, spec, cand, policy=DEFAULT_POLICY, n_samples=10_000):
    """Two-mode condition (ii): no sliding plus full-rank base differences."""
    exclusion = sliding_exclusion(sys, policy, n_samples)
    n = sys.dim
    rank_margins = {}
    for j1, j2 in itertools.combinations(range(1, spec.K + 1), 2):
        D = cand.matrices[j1 - 1] - cand.matrices[j2 - 1]
        sv = np.linalg.svd(D, compute_uv=False)
        rank_margins[(j1, j2)] = float(sv[-1]) if sv[-1] > policy.abs_tol else 0.0
    return TwoModeReport(exclusion=exclusion, rank_margins=rank_margins)


# ---------------------------------------------------------------------------
# combined certification


@dataclass
class Certificate:
    candidate: Candidate
    spec: MaxMinSpec
    cond_i: ConditionIReport
    cond_ii_kind: str  # "planar" | "two-mode" | "unchecked"
    cond_ii: object
    verdict: str
    policy: object
    notes: list = field(default_factory=list)


def certify(
    sys,
    spec,
    cand=None,
    policy=DEFAULT_POLICY,
    search=False,
    search_opts=None,
    complete=True,
):
    """Run condition (i) (verify or search) and dispatch condition (ii).

    ``complete=False`` checks the supplied multipliers verbatim, which
    is what certificate re-verification needs; the default fills in
    missing multipliers by the convex per-group optimization first.
    """
    _require_linear_conic(sys)
    notes = []
    if cand is None and not search:
        raise InvalidInputError("certify needs a candidate or search=True")
    if search:
        result = search_condition_i(sys, spec, policy, search_opts)
        if not result.found:
            empty = ConditionIReport(
                groups=[], margins=[], matching=None, evidence={}, required_margin=policy.margin
            )
            return Certificate(
                candidate=cand or Candidate(matrices=[]),
                spec=spec,
                cond_i=empty,
                cond_ii_kind="unchecked",
                cond_ii=None,
                verdict=VERDICT_NOT_CERTIFIED,
                policy=policy,
                notes=[result.message or "condition (i) search failed"],
            )
        cand = result.candidate
        notes.append(
            f"condition (i) candidate found by search in {result.elapsed:.1f}s"
        )
    elif complete:
        cand = complete_multipliers(sys, spec, cand, policy)

    cond_i = check_condition_i(sys, spec, cand, policy)
    if cond_i.matching is None:
        notes.append("pairing: all permutations against every mode")
    else:
        notes.append(
            "pairing: matched (mode -> base "
            + ", ".join(f"{i}->{f}" for i, f in sorted(cond_i.matching.items()))
            + f"; validated on {cond_i.evidence.get('samples', 0)} samples)"
        )
    if not cond_i.ok:
        return Certificate(
            candidate=cand,
            spec=spec,
            cond_i=cond_i,
            cond_ii_kind="unchecked",
            cond_ii=None,
            verdict=VERDICT_NOT_CERTIFIED,
            policy=policy,
            notes=notes,
        )

    if spec.K == 1 or sys.M == 1:
        # a single base is C^1, a single mode has no switching surface;
        # either way the nonsmooth-times-multivalued case is empty
        cond_ii = None
        kind = "vacuous"
        ok = True
        notes.append("condition (ii) vacuous (single base or single mode)")
    elif sys.dim == 2 and sys.M >= 2 and all(
        m.region_kind == "cone" for m in sys.modes
    ):
        cond_ii = planar_condition_ii(sys, spec, cand, policy)
        kind = "planar"
        ok = cond_ii.ok
    elif sys.M == 2:
        try:
            cond_ii = check_condition_ii_2mode(sys, spec, cand, policy)
            kind = "two-mode"
            ok = cond_ii.ok
        except InvalidInputError as err:
            cond_ii = None
            kind = "unchecked"
            ok = False
            notes.append(f"condition (ii) unchecked: {err}")
    else:
        cond_ii = None
        kind = "unchecked"
        ok = False
        notes.append(
            "condition (ii) unchecked: no procedure for this dimension/mode count"
        )

    if ok:
        verdict = VERDICT_GAS
    else:
        verdict = VERDICT_COND_I_ONLY
    return Certificate(
        candidate=cand,
        spec=spec,
        cond_i=cond_i,
        cond_ii_kind=kind,
        cond_ii=cond_ii,
        verdict=verdict,
        policy=policy,
        notes=notes,
    )
