"""Closed-loop plant with relay compensation and Coulomb friction.

The plant is normalized to unit inertia and works in error coordinates:
``x1`` is the position deviation from the set-point and ``x2`` its rate.
Set-valued terms (relay at ``x1 = 0``, friction at ``x2 = 0``) are returned as
:class:`~frictioncomp.friction.Interval` and left for the integrator to resolve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import DomainError, UnboundedSetError
from .friction import (
    FrictionModel,
    FrictionParams,
    Interval,
    PreslidingState,
    Regime,
    coulomb_force,
    friction_value,
)


class Motion(str, Enum):
    MOVING = "moving"
    STUCK = "stuck"


@dataclass(frozen=True)
class PlantParams:
    k: float
    c: float
    friction: FrictionParams
    gamma: float
    f_bound: float = 0.0
    actuator_lag: float | None = None

    def __post_init__(self):
        for name in ("k", "c", "gamma", "f_bound"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} must be finite and >= 0, got {value}")
        if self.actuator_lag is not None and not self.actuator_lag > 0:
            raise DomainError(f"actuator_lag must be > 0, got {self.actuator_lag}")

    @property
    def c_f(self):
        return self.friction.c_f

    @property
    def presliding(self):
        return self.friction.model is FrictionModel.PRESLIDING


@dataclass(frozen=True)
class SystemState:
    x1: float
    x2: float
    presliding: PreslidingState | None = None
    motion: Motion = Motion.MOVING
    actuator: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "motion", Motion(self.motion))
        if self.motion is Motion.STUCK and self.x2 != 0.0:
            raise DomainError("a stuck state must have x2 == 0")


@dataclass(frozen=True)
class VectorFieldValue:
    dx1: float
    dx2: float | Interval
    dactuator: float | Interval | None = field(default=None)


def _sign(x):
    return (x > 0) - (x < 0)


def relay_control(x1, gamma):
    """Relay compensator ``-gamma sign(x1)``; set-valued on the switching line."""
    if gamma < 0:
        raise DomainError(f"gamma must be >= 0, got {gamma}")
    if x1 > 0:
        return -gamma
    if x1 < 0:
        return gamma
    return Interval(-gamma, gamma)


def closed_loop_field(state, p):
    """Right-hand side of the closed loop at ``state``."""
    x1, x2 = state.x1, state.x2
    if not (math.isfinite(x1) and math.isfinite(x2)):
        raise DomainError("state must be finite")
    linear = -p.k * x1 - p.c * x2
    relay = relay_control(x1, p.gamma)

    if p.presliding:
        ps = state.presliding or PreslidingState()
        if x2 != 0:
            direction = _sign(x2)
        elif ps.regime is Regime.SLIDING or ps.z != 0:
            direction = _sign(ps.z) or 1
        else:
            direction = 1  # f_p(0) = C_f f_r for either direction
        friction = -friction_value(ps, direction, p.friction)
    else:
        friction = coulomb_force(x2, p.friction)

    dact = None
    if p.actuator_lag is not None:
        a = 0.0 if state.actuator is None else state.actuator
        u = a
        if isinstance(relay, Interval):
            dact = Interval((relay.lo - a) / p.actuator_lag, (relay.hi - a) / p.actuator_lag)
        else:
            dact = (relay - a) / p.actuator_lag
    else:
        u = relay
    return VectorFieldValue(dx1=x2, dx2=friction + u + linear, dactuator=dact)


def filippov_limits(x1, p):
    """One-sided limits ``g+`` and ``g-`` of the unforced field on ``x2 = 0``."""
    g_plus = VectorFieldValue(0.0, -p.k * x1 - p.c_f)
    g_minus = VectorFieldValue(0.0, -p.k * x1 + p.c_f)
    return g_plus, g_minus


def stick_condition(x1, p, u=None):
    """True when friction can hold the mass at rest at position ``x1``.

    ``u`` overrides the relay output (used with actuator lag, where the
    applied input is the filter state).
    """
    if u is None:
        if x1 == 0:
            return True
        u = -p.gamma * _sign(x1)
    return abs(-p.k * x1 + u) <= p.c_f


def invariant_set(p):
    """Interval of rest positions on the ``x1`` axis (``Lambda_I``)."""
    if p.gamma > p.c_f:
        return Interval(0.0, 0.0)
    if p.k <= 0:
        raise UnboundedSetError("k = 0 with gamma <= C_f: every position sticks")
    half = (p.c_f - p.gamma) / p.k
    return Interval(-half, half)
