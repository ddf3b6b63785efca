"""Coulomb and presliding friction laws.

Two sign conventions meet here.  :func:`coulomb_force` returns the force the
friction exerts on the (unit) mass, ``-C_f sign(x2)``.  The presliding map
(:func:`presliding_force`, :func:`friction_value`) returns the friction value
``f`` that enters the closed loop as ``x2' = ... - f``; it carries the sign of
the motion on the sliding branch.  Trajectories store ``f``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import DomainError, InputError, StateError


class FrictionModel(str, Enum):
    DISCONTINUOUS = "discontinuous"
    PRESLIDING = "presliding"


class Regime(str, Enum):
    PRESLIDING = "presliding"
    SLIDING = "sliding"


@dataclass(frozen=True)
class Interval:
    """Closed interval used for set-valued (Filippov) evaluations."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    def __contains__(self, value):
        return self.lo <= value <= self.hi

    def __add__(self, other):
        if isinstance(other, Interval):
            return Interval(self.lo + other.lo, self.hi + other.hi)
        return Interval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    @property
    def width(self):
        return self.hi - self.lo


@dataclass(frozen=True)
class FrictionParams:
    c_f: float
    s: float | None = None
    model: FrictionModel = FrictionModel.DISCONTINUOUS

    def __post_init__(self):
        object.__setattr__(self, "model", FrictionModel(self.model))
        if not (math.isfinite(self.c_f) and self.c_f > 0):
            raise DomainError(f"c_f must be positive, got {self.c_f}")
        if self.model is FrictionModel.PRESLIDING:
            if self.s is None or not (math.isfinite(self.s) and self.s > 0):
                raise DomainError(f"presliding model needs s > 0, got {self.s}")


@dataclass(frozen=True)
class PreslidingState:
    """Presliding memory: distance since the last reversal and the force there.

    ``f_r`` is normalized by ``C_f``.
    """

    z: float = 0.0
    f_r: float = 0.0
    regime: Regime = Regime.PRESLIDING

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))
        if abs(self.f_r) > 1.0:
            raise StateError(f"|f_r| must not exceed 1, got {self.f_r}")
        if self.regime is Regime.PRESLIDING and abs(self.z) > 1.0:
            raise StateError(f"|z| must not exceed 1 while presliding, got {self.z}")


ForceValue = float | Interval


def _finite(value, name):
    if not math.isfinite(value):
        raise InputError(f"{name} must be finite, got {value}")


def coulomb_force(x2, p):
    """Force of discontinuous Coulomb friction acting on the mass.

    Returns ``-C_f sign(x2)``, or the interval ``[-C_f, C_f]`` at ``x2 == 0``.
    """
    _finite(x2, "x2")
    if x2 > 0:
        return -p.c_f
    if x2 < 0:
        return p.c_f
    return Interval(-p.c_f, p.c_f)


def presliding_branch(z):
    """Normalized presliding branch ``z (1 - ln|z|)`` on ``[-1, 1]``.

    Accepts scalars or arrays.  The removable singularity at zero is filled
    with its limit 0.
    """
    za = np.asarray(z, dtype=float)
    if np.any(np.abs(za) > 1.0) or not np.all(np.isfinite(za)):
        raise DomainError("presliding branch is defined for |z| <= 1 only")
    mag = np.abs(za)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(mag > 0.0, za * (1.0 - np.log(mag)), 0.0)
    if np.ndim(z) == 0:
        return float(out)
    return out


def presliding_force(ps, x2_sign, p):
    """Friction value ``C_f (|sign - f_r| f0(z) + f_r)`` on the current branch."""
    if ps.regime is not Regime.PRESLIDING:
        raise StateError("presliding_force needs the presliding regime")
    if abs(ps.f_r) > 1.0:
        raise StateError(f"|f_r| must not exceed 1, got {ps.f_r}")
    if x2_sign not in (-1, 1):
        raise DomainError(f"x2_sign must be -1 or +1, got {x2_sign}")
    return p.c_f * (abs(x2_sign - ps.f_r) * presliding_branch(ps.z) + ps.f_r)


def friction_value(ps, x2_sign, p):
    """Continuous friction including the sliding hand-over branch."""
    if ps.regime is Regime.SLIDING:
        return p.c_f * x2_sign
    return presliding_force(ps, x2_sign, p)


def reversal_update(ps, f_p_at_reversal):
    """Start a new presliding branch at a motion reversal."""
    if abs(f_p_at_reversal) > 1.0:
        # values a hair above 1 come from the sliding hand-over
        if abs(f_p_at_reversal) - 1.0 > 1e-12:
            raise StateError(f"|f_p| must not exceed 1, got {f_p_at_reversal}")
        f_p_at_reversal = math.copysign(1.0, f_p_at_reversal)
    return PreslidingState(z=0.0, f_r=float(f_p_at_reversal), regime=Regime.PRESLIDING)


def advance_presliding_distance(ps, x2, dt, p):
    """Accumulate ``s * x2 * dt`` into ``z``; clamp and switch to sliding at ``|z| = 1``.

    Once sliding, ``z`` stays clamped until the next :func:`reversal_update`.
    """
    if dt < 0:
        raise DomainError(f"dt must be non-negative, got {dt}")
    _finite(x2, "x2")
    if ps.regime is Regime.SLIDING:
        return ps
    z = ps.z + p.s * x2 * dt
    if abs(z) >= 1.0:
        return replace(ps, z=math.copysign(1.0, z), regime=Regime.SLIDING)
    return replace(ps, z=z)
