"""Event-driven integration of Filippov solutions.

Inside a region the active mode is integrated with an adaptive
Dormand-Prince 5(4) scheme.  A sign change of the active region
function triggers bisection down to the event tolerance; at the
surface the two adjacent normal field components decide between a
transversal switch and first-order sliding, in which case the tangent
convex combination of the two fields is integrated with re-projection
onto the surface after every accepted step.  Codimension-2
intersections and step underflow terminate with a stall status rather
than an error.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import InvalidInputError
from .policy import DEFAULT_POLICY, NumericPolicy

COMPLETED = "completed"
LEFT_DOMAIN = "left-domain"
STALL = "stall"


@dataclass(frozen=True)
class SimOptions:
    horizon: float
    max_step: float = 0.02
    event_tol: float = 1e-11
    rtol: float = 1e-9
    atol: float = 1e-12
    min_step: float = 1e-13
    blowup: float = 1e9
    max_switches_per_window: int = 50
    policy: NumericPolicy = DEFAULT_POLICY

    def __post_init__(self):
        if self.horizon <= 0:
            raise InvalidInputError("horizon must be positive")
        if self.max_step <= 0 or self.event_tol <= 0:
            raise InvalidInputError("steps and tolerances must be positive")


@dataclass(frozen=True)
class Regime:
    kind: str  # "mode" | "sliding"
    mode: Optional[int] = None  # active mode index
    surface: Optional[int] = None  # sliding surface id (registry order)
    pair: Optional[tuple] = None  # sliding mode pair, weight on pair[0]
    lam: Optional[float] = None

    def label(self):
        if self.kind == "mode":
            return f"Mode({self.mode})"
        return f"Sliding({self.surface})"


@dataclass(frozen=True)
class TrajSample:
    t: float
    x: np.ndarray
    regime: Regime


@dataclass(frozen=True)
class Crossing:
    t: float
    x: np.ndarray
    from_mode: int
    to_mode: int


@dataclass
class Trajectory:
    samples: list
    status: str
    crossings: list = field(default_factory=list)
    surfaces: dict = field(default_factory=dict)  # mode pair -> surface id

    @property
    def t_end(self):
        return self.samples[-1].t

    @property
    def x_end(self):
        return self.samples[-1].x


# ---------------------------------------------------------------------------
# Dormand-Prince 5(4)

_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_DP_B4 = (
    5179 / 57600,
    0.0,
    7571 / 16695,
    393 / 640,
    -92097 / 339200,
    187 / 2100,
    1 / 40,
)


def _dp_step(f, x, dt):
    """One Dormand-Prince step; returns (5th-order state, error estimate)."""
    k = [f(x)]
    for stage in range(1, 7):
        y = x + dt * sum(a * k[j] for j, a in enumerate(_DP_A[stage]))
        k.append(f(y))
    x5 = x + dt * sum(b * k[j] for j, b in enumerate(_DP_B5))
    x4 = x + dt * sum(b * k[j] for j, b in enumerate(_DP_B4))
    return x5, x5 - x4


def _error_norm(err, x, x_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(x), np.abs(x_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


# ---------------------------------------------------------------------------
# surface helpers


def _hn(sys, i, x):
    """Region function of mode i, normalized to be scale-free."""
    mode = sys.modes[i - 1]
    v = mode.region_value(x)
    if mode.Q is not None:
        return v / max(float(x @ x), 1e-300)
    return v / (1.0 + float(np.linalg.norm(x)))


def _project_to_surface(sys, i, x, tol, iters=5):
    """Newton steps along the region gradient onto {H_i = 0}."""
    y = np.array(x, dtype=float)
    for _ in range(iters):
        if abs(_hn(sys, i, y)) <= 0.1 * tol:
            break
        h = sys.modes[i - 1].region_value(y)
        g = sys.modes[i - 1].region_gradient(y)
        gg = float(g @ g)
        if gg <= 0.0:
            break
        y = y - (h / gg) * g
    return y


def project_to_surface(sys, pair, x, tol=1e-12):
    """Public helper: project x onto the surface shared by a mode pair."""
    surf = pair[0] if sys.modes[pair[0] - 1].region_kind != "all" else pair[1]
    return _project_to_surface(sys, surf, x, tol)


def _normal_components(sys, x, pair, policy):
    a_mode, b_mode = pair
    surf = a_mode if sys.modes[a_mode - 1].region_kind != "all" else b_mode
    grad = sys.modes[surf - 1].region_gradient(x)
    fa = sys.field(a_mode, x)
    fb = sys.field(b_mode, x)
    na = float(grad @ fa)
    nb = float(grad @ fb)
    scale = float(np.linalg.norm(grad)) * max(
        float(np.linalg.norm(fa)), float(np.linalg.norm(fb)), 1.0
    )
    return na, nb, policy.abs_tol * max(scale, 1.0)


def sliding_lambda(sys, x, policy=DEFAULT_POLICY, pair=None):
    """Weight of the first adjacent field in the tangent combination.

    Solves grad H . (lam * f_a + (1 - lam) * f_b) = 0 on the surface
    shared by the two adjacent modes.  Returns lam when it falls in
    [0, 1] (sliding); None for a transversal crossing or a tangency
    (both normal components vanish).
    """
    x = np.asarray(x, dtype=float)
    if pair is None:
        idx = sys.index_set(x, policy)
        if len(idx) != 2:
            raise InvalidInputError(
                f"sliding_lambda needs exactly two adjacent modes, found {idx}"
            )
        pair = idx
    na, nb, tol = _normal_components(sys, x, pair, policy)
    if abs(na) <= tol and abs(nb) <= tol:
        return None  # tangency; either mode may proceed
    if na == nb:
        return None
    lam = nb / (nb - na)
    if 0.0 <= lam <= 1.0:
        return float(lam)
    return None


# ---------------------------------------------------------------------------
# the integrator


class _Sim:
    def __init__(self, sys, x0, opts):
        self.sys = sys
        self.opts = opts
        self.x = np.asarray(x0, dtype=float)
        if not np.all(np.isfinite(self.x)):
            raise InvalidInputError("initial state has non-finite entries")
        self.t = 0.0
        self.samples = []
        self.crossings = []
        self.surfaces = {}
        self.status = COMPLETED
        self.window_start = 0.0
        self.switches_in_window = 0
        # membership queries at event points tolerate the event band
        self.event_policy = replace(
            opts.policy, abs_tol=max(opts.policy.abs_tol, 10.0 * opts.event_tol)
        )

    def surface_id(self, pair):
        key = tuple(sorted(pair))
        if key not in self.surfaces:
            self.surfaces[key] = len(self.surfaces) + 1
        return self.surfaces[key]

    def record(self, regime):
        self.samples.append(TrajSample(t=self.t, x=self.x.copy(), regime=regime))

    def note_switch(self):
        if self.t - self.window_start > self.opts.max_step:
            self.window_start = self.t
            self.switches_in_window = 0
        self.switches_in_window += 1

    def chattering(self):
        return self.switches_in_window > self.opts.max_switches_per_window

    def entering_mode(self, candidates):
        """Candidate whose own field increases its own region function."""
        best, best_rate = None, 0.0
        for i in candidates:
            mode = self.sys.modes[i - 1]
            if mode.region_kind == "all":
                return i
            rate = float(mode.region_gradient(self.x) @ mode.field(self.x))
            if rate > best_rate:
                best, best_rate = i, rate
        return best

    def regime_here(self, leaving=None):
        """Regime at the current (possibly boundary) point; None = stall."""
        idx = self.sys.index_set(self.x, self.event_policy)
        if len(idx) == 1:
            return Regime(kind="mode", mode=idx[0])
        if len(idx) > 2:
            return None  # codimension >= 2 (e.g. the origin)
        if leaving is None or leaving not in idx:
            pair = idx
        else:
            pair = (leaving, *[j for j in idx if j != leaving])
        lam = sliding_lambda(self.sys, self.x, self.opts.policy, pair=pair)
        if lam is None and self.chattering():
            lam = self._widened_lambda(pair)
        if lam is not None:
            return Regime(
                kind="sliding", surface=self.surface_id(pair), pair=pair, lam=lam
            )
        others = [j for j in pair if j != leaving]
        enter = self.entering_mode(others or list(pair))
        if enter is None:
            enter = others[0] if others else pair[0]
        return Regime(kind="mode", mode=enter)

    def _widened_lambda(self, pair):
        na, nb, _ = _normal_components(self.sys, self.x, pair, self.opts.policy)
        if na == nb:
            return None
        lam = nb / (nb - na)
        if -0.05 <= lam <= 1.05:
            return float(min(1.0, max(0.0, lam)))
        return None

    # -- mode flow with event location

    def run_mode(self, regime):
        i = regime.mode
        mode = self.sys.modes[i - 1]
        f = mode.field
        opts = self.opts
        has_boundary = mode.region_kind != "all"
        armed = has_boundary and _hn(self.sys, i, self.x) > opts.event_tol
        dt = opts.max_step
        while self.t < opts.horizon * (1.0 - 1e-15):
            if float(np.linalg.norm(self.x)) > opts.blowup:
                self.status = LEFT_DOMAIN
                return None
            dt = min(dt, opts.max_step, opts.horizon - self.t)
            x_new, err = _dp_step(f, self.x, dt)
            enorm = _error_norm(err, self.x, x_new, opts.rtol, opts.atol)
            if enorm > 1.0:
                dt *= max(0.2, 0.9 * enorm**-0.2)
                if dt < opts.min_step:
                    self.status = STALL
                    return None
                continue
            if has_boundary:
                h_new = _hn(self.sys, i, x_new)
                if armed and h_new < -opts.event_tol:
                    self._locate_event(f, dt, i)
                    self.note_switch()
                    nxt = self.regime_here(leaving=i)
                    if nxt is None:
                        self.status = STALL
                        return None
                    if nxt.kind == "mode":
                        self.crossings.append(
                            Crossing(
                                t=self.t, x=self.x.copy(), from_mode=i, to_mode=nxt.mode
                            )
                        )
                    self.record(nxt)
                    return nxt
                if h_new > opts.event_tol:
                    armed = True
            self.t += dt
            self.x = x_new
            self.record(regime)
            dt *= min(5.0, 0.9 * enorm**-0.2) if enorm > 0.0 else 5.0
        return None

    def _locate_event(self, f, dt, i):
        """Bisection on the substep length down to the event tolerance."""
        lo, hi = 0.0, dt
        tau = dt
        x_tau, _ = _dp_step(f, self.x, dt)
        for _ in range(60):
            h = _hn(self.sys, i, x_tau)
            if abs(h) <= self.opts.event_tol:
                break
            if h < 0.0:
                hi = tau
            else:
                lo = tau
            tau = 0.5 * (lo + hi)
            x_tau, _ = _dp_step(f, self.x, tau)
        self.t += tau
        self.x = x_tau

    # -- sliding flow

    def run_sliding(self, regime):
        pair = regime.pair
        a_mode, b_mode = pair
        surf = a_mode if self.sys.modes[a_mode - 1].region_kind != "all" else b_mode
        opts = self.opts
        state = {"lam": regime.lam if regime.lam is not None else 0.5}

        def g(y):
            lam = sliding_lambda(self.sys, y, opts.policy, pair=pair)
            if lam is not None:
                state["lam"] = lam
            lam = state["lam"]
            return lam * self.sys.field(a_mode, y) + (1.0 - lam) * self.sys.field(
                b_mode, y
            )

        dt = opts.max_step
        while self.t < opts.horizon * (1.0 - 1e-15):
            if float(np.linalg.norm(self.x)) > opts.blowup:
                self.status = LEFT_DOMAIN
                return None
            dt = min(dt, opts.max_step, opts.horizon - self.t)
            x_new, err = _dp_step(g, self.x, dt)
            enorm = _error_norm(err, self.x, x_new, opts.rtol, opts.atol)
            if enorm > 1.0:
                dt *= max(0.2, 0.9 * enorm**-0.2)
                if dt < opts.min_step:
                    self.status = STALL
                    return None
                continue
            x_new = _project_to_surface(self.sys, surf, x_new, opts.event_tol)
            self.t += dt
            self.x = x_new
            lam = sliding_lambda(self.sys, self.x, opts.policy, pair=pair)
            if lam is None:
                self.note_switch()
                enter = self.entering_mode(list(pair))
                if enter is None:
                    enter = pair[0]
                nxt = Regime(kind="mode", mode=enter)
                self.record(nxt)
                return nxt
            regime = Regime(kind="sliding", surface=regime.surface, pair=pair, lam=lam)
            self.record(regime)
            dt *= min(5.0, 0.9 * enorm**-0.2) if enorm > 0.0 else 5.0
        return None


def simulate(sys, x0, opts):
    """Integrate a Filippov solution from x0 over the option horizon."""
    sim = _Sim(sys, x0, opts)
    regime = sim.regime_here()
    if regime is None:
        idx = sim.sys.index_set(sim.x, sim.event_policy)
        sim.record(Regime(kind="mode", mode=idx[0]))
        return Trajectory(
            samples=sim.samples,
            status=STALL,
            crossings=sim.crossings,
            surfaces=sim.surfaces,
        )
    sim.record(regime)
    while regime is not None and sim.t < opts.horizon * (1.0 - 1e-15):
        if regime.kind == "mode":
            regime = sim.run_mode(regime)
        else:
            regime = sim.run_sliding(regime)
    return Trajectory(
        samples=sim.samples,
        status=sim.status,
        crossings=sim.crossings,
        surfaces=sim.surfaces,
    )


# ---------------------------------------------------------------------------
# export


def export_csv(traj, spec=None, basis=None):
    """CSV rendering: t, coordinates, regime, sliding weight, optional V."""
    if not traj.samples:
        raise InvalidInputError("export_csv: empty trajectory")
    n = len(traj.samples[0].x)
    cols = ["t"] + [f"x{i}" for i in range(1, n + 1)] + ["regime", "lambda"]
    with_v = spec is not None and basis is not None
    if with_v:
        cols.append("V")
    lines = [",".join(cols)]
    from .maxmin import evaluate

    for s in traj.samples:
        row = [f"{s.t:.12g}"] + [f"{v:.12g}" for v in s.x]
        row.append(s.regime.label())
        row.append("" if s.regime.lam is None else f"{s.regime.lam:.12g}")
        if with_v:
            row.append(f"{evaluate(spec, basis, s.x):.12g}")
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"
