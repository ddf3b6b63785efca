"""Event-driven integration of the hybrid closed loop.

Between events the discrete mode (relay side, motion direction, friction
regime, stuck flag) is frozen and the smooth right-hand side is stepped by the
Dormand-Prince kernel from :mod:`frictioncomp.kernels`.  Guard sign changes
are bracketed by the kernel and localized here by regula falsi on re-stepped
output; the discrete update (relay switch, reversal, stick entry/exit, regime
change) is then applied and a new segment started.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from . import kernels as K
from .errors import BracketError, DivergenceError, DomainError, IntegrationError
from .friction import PreslidingState, Regime
from .plant import Motion, PlantParams, SystemState

log = logging.getLogger(__name__)


class EventKind(str, Enum):
    RELAY_SWITCH = "RelaySwitch"
    VELOCITY_REVERSAL = "VelocityReversal"
    STICK_ENTRY = "StickEntry"
    STICK_EXIT = "StickExit"
    PRESLIDING_TO_SLIDING = "PreslidingToSliding"
    SLIDING_TO_PRESLIDING = "SlidingToPresliding"


class Termination(str, Enum):
    TIME_UP = "TimeUp"
    CONVERGED = "Converged"
    STUCK_OFF_ORIGIN = "StuckOffOrigin"


REGIME_NONE, REGIME_PRESLIDING, REGIME_SLIDING = -1, 0, 1
REGIME_LABELS = {REGIME_NONE: "none", REGIME_PRESLIDING: "presliding",
                 REGIME_SLIDING: "sliding"}
MOTION_LABELS = {0: "moving", 1: "stuck"}


@dataclass(frozen=True)
class Scenario:
    plant: PlantParams
    x0: SystemState
    t_end: float
    dt_max: float = 1e-3
    event_tol: float = 1e-10
    convergence_radius: float = 1e-6
    convergence_norm: str = "plain"
    rest_tol: float = 1e-9
    rtol: float = 1e-10
    atol: float = 1e-13
    max_events: int = 2_000_000

    def __post_init__(self):
        if not 0 < self.event_tol < self.dt_max <= self.t_end:
            raise DomainError("need 0 < event_tol < dt_max <= t_end")
        if self.convergence_radius < 0:
            raise DomainError("convergence_radius must be >= 0")
        if self.rest_tol < 0:
            raise DomainError("rest_tol must be >= 0")
        if self.convergence_norm not in ("plain", "energy"):
            raise DomainError("convergence_norm must be 'plain' or 'energy'")
        if not (self.rtol > 0 and self.atol > 0):
            raise DomainError("rtol and atol must be positive")

    def with_gamma(self, gamma):
        return replace(self, plant=replace(self.plant, gamma=gamma))


@dataclass(frozen=True)
class HybridEvent:
    t: float
    kind: EventKind
    state_before: SystemState
    state_after: SystemState


@dataclass
class Trajectory:
    """Samples of the hybrid run, one row per accepted step or event.

    ``f`` is the friction value (``x2' = ... - f``), ``u`` the applied input.
    ``work_f``/``work_u`` are the running integrals of ``f x2`` and ``u x2``.
    """

    t: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    u: np.ndarray
    f: np.ndarray
    z: np.ndarray
    regime: np.ndarray
    motion: np.ndarray
    actuator: np.ndarray
    work_f: np.ndarray
    work_u: np.ndarray
    events: list
    termination: Termination
    scenario: Scenario
    backend: str = field(default=K.BACKEND)

    def __len__(self):
        return len(self.t)

    @property
    def t_final(self):
        return float(self.t[-1])

    @property
    def convergence_time(self):
        if self.termination is Termination.CONVERGED:
            return self.t_final
        return math.inf

    def events_of(self, *kinds):
        return [e for e in self.events if e.kind in kinds]

    @classmethod
    def from_samples(cls, t, x1, x2=None, f=None, u=None, termination=Termination.TIME_UP):
        """Wrap externally produced samples (no events, no scenario)."""
        t = np.asarray(t, float)
        x1 = np.asarray(x1, float)
        x2 = np.gradient(x1, t) if x2 is None else np.asarray(x2, float)
        zero = np.zeros_like(t)
        f = zero.copy() if f is None else np.asarray(f, float)
        u = zero.copy() if u is None else np.asarray(u, float)
        return cls(t=t, x1=x1, x2=x2, u=u, f=f, z=zero.copy(),
                   regime=np.full(len(t), REGIME_NONE, dtype=np.int8),
                   motion=np.zeros(len(t), dtype=np.int8), actuator=zero.copy(),
                   work_f=zero.copy(), work_u=zero.copy(), events=[],
                   termination=Termination(termination), scenario=None)


def locate_event(guard, bracket, tol=1e-10, max_iter=200):
    """Localize the sign change of ``guard`` on ``bracket`` to width ``tol``.

    Uses the Illinois variant of regula falsi with a bisection safeguard.
    Returns the right end of the final bracket, i.e. a time at which the guard
    has already left the sign it had at ``bracket[0]``.
    """
    a, b = float(bracket[0]), float(bracket[1])
    if not a < b:
        raise BracketError(f"degenerate bracket [{a}, {b}]")
    ga, gb = guard(a), guard(b)
    if ga == 0 or (ga > 0) == (gb > 0) and gb != 0:
        raise BracketError(f"no sign change on [{a}, {b}]: {ga}, {gb}")
    s = 1.0 if ga > 0 else -1.0
    ga, gb = s * ga, s * gb
    side = 0
    for it in range(max_iter):
        if gb == 0 or b - a <= tol:
            return b
        if it % 4 == 3:
            m = 0.5 * (a + b)
        else:
            m = (a * gb - b * ga) / (gb - ga)
            if not a < m < b:
                m = 0.5 * (a + b)
        gm = s * guard(m)
        if gm > 0:
            a, ga = m, gm
            if side == -1:
                gb *= 0.5
            side = -1
        else:
            b, gb = m, gm
            if side == 1:
                ga *= 0.5
            side = 1
    return b


def _sgn(x):
    return 1.0 if x > 0 else (-1.0 if x < 0 else 0.0)


class _Mode:
    """Discrete part of the hybrid state."""

    def __init__(self, relay, vel, stuck, regime, f_r):
        self.relay = relay
        self.vel = vel
        self.stuck = stuck
        self.regime = regime  # None for the discontinuous model
        self.f_r = f_r

    def code(self):
        if self.stuck:
            return K.MODE_STUCK
        if self.regime is Regime.PRESLIDING:
            return K.MODE_PRESLIDING
        return K.MODE_FIXED


class _Runner:
    def __init__(self, sc):
        self.sc = sc
        p = sc.plant
        self.p = p
        self.lag = p.actuator_lag is not None
        self.pres = p.presliding
        par = np.zeros(K.NPAR)
        par[K.P_K] = p.k
        par[K.P_C] = p.c
        par[K.P_CF] = p.c_f
        par[K.P_GAMMA] = p.gamma
        par[K.P_S] = p.friction.s if self.pres else 0.0
        par[K.P_LAG] = p.actuator_lag if self.lag else 0.0
        par[K.P_RTOL] = sc.rtol
        par[K.P_ATOL] = sc.atol
        par[K.P_HMAX] = sc.dt_max
        par[K.P_HMIN] = 1e-15 * max(1.0, sc.t_end)
        par[K.P_RADIUS] = sc.convergence_radius
        par[K.P_WX1] = math.sqrt(p.k) if sc.convergence_norm == "energy" else 1.0
        self.par = par
        # overdamped sliding approaches its equilibrium only asymptotically
        self.rest_armed = (not self.lag and p.k > 0 and sc.rest_tol > 0)
        self.events = []
        self.chunks = []

    # -- helpers -------------------------------------------------------
    def load(self, mode):
        self.par[K.P_RELAY] = mode.relay
        self.par[K.P_VEL] = mode.vel
        self.par[K.P_MODE] = mode.code()
        self.par[K.P_FR] = mode.f_r
        xeq = self.rest_point(mode)
        self.par[K.P_XEQ] = 0.0 if xeq is None else xeq
        self.par[K.P_REST] = 0.0 if xeq is None else self.sc.rest_tol

    def rest_point(self, mode):
        """Equilibrium of the frozen smooth mode, if the rest guard applies."""
        if not self.rest_armed or mode.stuck or mode.code() != K.MODE_FIXED:
            return None
        p = self.p
        return (-p.c_f * mode.vel - p.gamma * mode.relay) / p.k

    def norm(self, y):
        return math.hypot(self.par[K.P_WX1] * y[0], y[1])

    def applied(self, y, relay):
        return y[3] if self.lag else -self.p.gamma * relay

    def state(self, y, mode):
        ps = None
        if self.pres:
            reg = mode.regime
            z = y[2]
            if reg is Regime.PRESLIDING and abs(z) > 1.0:
                z = math.copysign(1.0, z)
            ps = PreslidingState(z=z, f_r=mode.f_r, regime=reg)
        return SystemState(
            x1=float(y[0]), x2=0.0 if mode.stuck else float(y[1]), presliding=ps,
            motion=Motion.STUCK if mode.stuck else Motion.MOVING,
            actuator=float(y[3]) if self.lag else None)

    def record(self, ts, ys, mode):
        if len(ts) == 0:
            return
        n = len(ts)
        code = mode.code()
        cf = self.p.c_f
        u = ys[:, 3].copy() if self.lag else np.full(n, -self.p.gamma * mode.relay)
        if code == K.MODE_STUCK:
            f = -self.p.k * ys[:, 0] + u
        elif code == K.MODE_PRESLIDING:
            z = ys[:, 2]
            mag = np.abs(z)
            with np.errstate(divide="ignore", invalid="ignore"):
                br = np.where(mag > 0, z * (1.0 - np.log(mag)), 0.0)
            f = cf * (abs(mode.vel - mode.f_r) * br + mode.f_r)
        else:
            f = np.full(n, cf * mode.vel)
        if mode.regime is None:
            reg = REGIME_NONE
        else:
            reg = REGIME_PRESLIDING if mode.regime is Regime.PRESLIDING else REGIME_SLIDING
        self.chunks.append((np.asarray(ts, float), np.asarray(ys, float), u, f,
                            np.full(n, reg, dtype=np.int8),
                            np.full(n, 1 if mode.stuck else 0, dtype=np.int8)))

    def presliding_value(self, y, mode):
        """Normalized friction at ``y`` on the current branch."""
        if mode.regime is Regime.SLIDING:
            return mode.vel
        z = max(-1.0, min(1.0, y[2]))
        br = 0.0 if z == 0 else z * (1.0 - math.log(abs(z)))
        return abs(mode.vel - mode.f_r) * br + mode.f_r

    def resolve_rest(self, y, mode):
        """Decide stick vs. motion direction for a state with ``x2 == 0``.

        Mutates ``mode`` and ``y`` (presliding reset) and returns the event
        kinds produced.
        """
        p = self.p
        kinds = []
        relay = mode.relay if y[0] == 0 else _sgn(y[0])
        mode.relay = relay if relay != 0 else mode.relay
        u = self.applied(y, relay)
        net = -p.k * y[0] + u
        if self.pres:
            was_sliding = mode.regime is Regime.SLIDING
            fp = max(-1.0, min(1.0, self.presliding_value(y, mode)))
            mode.f_r = fp
            mode.regime = Regime.PRESLIDING
            y[2] = 0.0
            acc = net - p.c_f * fp
            if was_sliding:
                kinds.append(EventKind.SLIDING_TO_PRESLIDING)
            if abs(acc) <= 1e-14 * (abs(net) + p.c_f) and not self.lag:
                mode.stuck = True
                kinds.insert(0, EventKind.STICK_ENTRY)
            else:
                if acc == 0.0:
                    acc = -p.gamma * relay - y[3]
                mode.vel = _sgn(acc) or -mode.vel
                mode.stuck = False
                kinds.insert(0, EventKind.VELOCITY_REVERSAL)
            return kinds
        if abs(net) <= p.c_f:
            mode.stuck = True
            kinds.append(EventKind.STICK_ENTRY)
        else:
            mode.vel = _sgn(net)
            mode.stuck = False
            kinds.append(EventKind.VELOCITY_REVERSAL)
        return kinds

    def guards(self, mode):
        p = self.p
        out = {}
        if mode.stuck:
            relay = mode.relay
            out["unstick"] = lambda y: p.c_f - abs(-p.k * y[0] + self.applied(y, relay))
            return out
        radius = self.sc.convergence_radius
        out["conv"] = lambda y: self.norm(y) - radius
        r, v = mode.relay, mode.vel
        out["vel"] = lambda y: y[1] * v
        out["relay"] = lambda y: y[0] * r
        if mode.regime is Regime.PRESLIDING:
            out["regime"] = lambda y: 1.0 - abs(y[2])
        xeq = self.rest_point(mode)
        if xeq is not None:
            wk, tol = math.sqrt(p.k), self.sc.rest_tol
            out["rest"] = lambda y: math.hypot(wk * (y[0] - xeq), y[1]) - tol
        return out

    def is_hit(self, name, g, y):
        return g(y) <= 0

    def _positive_start(self, name, g, at, t_prev, t_hi):
        """Bracket start where the guard is strictly positive.

        Guards snapped to zero by the previous event start at exactly 0; the
        scan walks forward from ``t_prev`` until the guard has left zero.
        """
        if g(at(t_prev)) > 0:
            return t_prev
        span = t_hi - t_prev
        for j in range(60, 0, -1):
            t = t_prev + span * 2.0 ** -j
            if t > t_prev and g(at(t)) > 0:
                return t
        raise IntegrationError(f"guard {name!r} re-triggered immediately at t={t_prev}")

    def earliest(self, y_prev, t_prev, t_hi, y_hi, mode):
        tol = self.sc.event_tol
        par = self.par.copy()
        guards = self.guards(mode)

        t_end, y_end = t_hi, np.asarray(y_hi)

        def at(t):
            # the kernel's own step end, bit for bit, so the trip is reproduced
            if t == t_end:
                return y_end
            return K.step(y_prev, t - t_prev, par) if t > t_prev else np.asarray(y_prev)

        while True:
            hits = [n for n, g in guards.items() if self.is_hit(n, g, y_hi)]
            if not hits:
                raise IntegrationError(f"guard trip at t={t_hi} not reproduced")
            times = {}
            for n in hits:
                g = guards[n]
                start = self._positive_start(n, g, at, t_prev, t_hi)
                times[n] = locate_event(lambda t, g=g: g(at(t)), (start, t_hi), tol)
            t_min = min(times.values())
            if t_hi - t_min <= tol:
                return hits, t_hi, np.array(y_hi, dtype=float)
            t_hi = t_min
            y_hi = at(t_hi)

    # -- main loop -----------------------------------------------------
    def run(self):
        sc, p = self.sc, self.p
        x0 = sc.x0
        ps0 = x0.presliding or PreslidingState()
        y = np.array([x0.x1, x0.x2, ps0.z if self.pres else 0.0,
                      (x0.actuator or 0.0) if self.lag else 0.0, 0.0, 0.0])
        if not np.all(np.isfinite(y)):
            raise DivergenceError("initial state is not finite")
        t = 0.0
        mode = _Mode(relay=_sgn(x0.x1) or _sgn(x0.x2) or 1.0,
                     vel=_sgn(x0.x2) or 1.0, stuck=False,
                     regime=ps0.regime if self.pres else None, f_r=ps0.f_r)

        if self.norm(y) <= sc.convergence_radius:
            self.load(mode)
            self.record([t], y[None, :], mode)
            return self.finish(Termination.CONVERGED)

        if x0.x2 == 0.0:
            before = self.state(y, mode)
            kinds = self.resolve_rest(y, mode)
            after = self.state(y, mode)
            for kind in kinds:
                if kind is not EventKind.VELOCITY_REVERSAL:
                    self.events.append(HybridEvent(t, kind, before, after))
        self.load(mode)
        self.record([t], y[None, :], mode)

        h = sc.dt_max / 100.0
        while True:
            if mode.stuck and not self.lag:
                term = (Termination.CONVERGED if self.norm(y) <= sc.convergence_radius
                        or (y[0] == 0.0 and y[1] == 0.0) else Termination.STUCK_OFF_ORIGIN)
                return self.finish(term)
            self.load(mode)
            # work integrals restart per segment so error control sees local scale
            offset = y[4:].copy()
            y_seg = y.copy()
            y_seg[4:] = 0.0
            status, ts, ys, h = K.advance(y_seg, t, sc.t_end, h, self.par, 4096)
            ys[:, 4:] += offset
            if status == K.STATUS_NONFINITE:
                raise DivergenceError(f"non-finite state near t={t}")
            if status == K.STATUS_UNDERFLOW:
                raise IntegrationError(f"step size underflow near t={t}, state={y}")
            if status != K.STATUS_GUARD:
                self.record(ts, ys, mode)
                if len(ts):
                    t, y = float(ts[-1]), ys[-1].copy()
                if status == K.STATUS_DONE:
                    return self.finish(Termination.TIME_UP)
                continue

            if len(ts) > 1:
                y_prev, t_prev = ys[-2].copy(), float(ts[-2])
            else:
                y_prev, t_prev = y.copy(), t
            self.record(ts[:-1], ys[:-1], mode)
            hits, t, y = self.earliest(y_prev, t_prev, float(ts[-1]), ys[-1], mode)
            if len(self.events) >= sc.max_events:
                raise IntegrationError(f"event cascade: {len(self.events)} events by t={t}")
            if "conv" in hits:
                self.record([t], y[None, :], mode)
                return self.finish(Termination.CONVERGED)
            before = self.state(y, mode)
            kinds = []
            if "rest" in hits:
                # limit point of the asymptotic approach
                y[0] = self.rest_point(mode)
                y[1] = 0.0
                mode.stuck = True
                hits = []
                kinds.append(EventKind.STICK_ENTRY)
            if "unstick" in hits:
                net = -p.k * y[0] + self.applied(y, mode.relay)
                mode.stuck = False
                mode.vel = _sgn(net)
                kinds.append(EventKind.STICK_EXIT)
            if "vel" in hits:
                y[1] = 0.0
                kinds.extend(self.resolve_rest(y, mode))
            if "relay" in hits:
                y[0] = 0.0
                mode.relay = -mode.relay
                kinds.append(EventKind.RELAY_SWITCH)
            if "regime" in hits and mode.regime is Regime.PRESLIDING:
                y[2] = math.copysign(1.0, y[2])
                mode.regime = Regime.SLIDING
                kinds.append(EventKind.PRESLIDING_TO_SLIDING)
            after = self.state(y, mode)
            for kind in kinds:
                self.events.append(HybridEvent(t, kind, before, after))
            self.load(mode)
            self.record([t], y[None, :], mode)

    def finish(self, termination):
        cols = list(zip(*self.chunks))
        ts = np.concatenate(cols[0])
        ys = np.concatenate(cols[1])
        return Trajectory(
            t=ts, x1=ys[:, 0], x2=ys[:, 1], u=np.concatenate(cols[2]),
            f=np.concatenate(cols[3]), z=ys[:, 2], regime=np.concatenate(cols[4]),
            motion=np.concatenate(cols[5]), actuator=ys[:, 3], work_f=ys[:, 4],
            work_u=ys[:, 5], events=self.events, termination=termination,
            scenario=self.sc)


def integrate(scenario):
    """Simulate ``scenario`` and return its :class:`Trajectory`."""
    traj = _Runner(scenario).run()
    log.debug("integrate: %d samples, %d events, %s at t=%.6g (%s backend)",
              len(traj), len(traj.events), traj.termination.value, traj.t_final,
              traj.backend)
    return traj
