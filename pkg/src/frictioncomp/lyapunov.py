"""Lyapunov functions, derivative bounds and convergence-time bounds.

``V_g`` is the quadratic energy of the linear loop, ``V_t`` the continuous
twisting function for the relay-compensated double integrator and ``V_f``
the reduced-dynamics candidate used for the presliding model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InsufficientDataError, PreconditionError, StabilityViolationError
from .friction import presliding_branch


def _xy(x):
    if hasattr(x, "x1"):
        return float(x.x1), float(x.x2)
    x1, x2 = x
    return float(x1), float(x2)


def v_quadratic(x, k):
    x1, x2 = _xy(x)
    return 0.5 * k * x1 * x1 + 0.5 * x2 * x2


def v_quadratic_rate(x, c, c_f):
    """Rate of ``V_g`` along the unforced loop: ``-c x2^2 - C_f |x2|``."""
    _, x2 = _xy(x)
    return -c * x2 * x2 - c_f * abs(x2)


@dataclass(frozen=True)
class TwistingBounds:
    gamma: float
    c_f: float
    f: float
    u_upper: float
    u_lower: float
    r: float
    alpha: tuple = field(repr=False)


def twisting_bounds(gamma, c_f, f=0.0):
    """Relay bounds ``U``, ``U*``, ratio ``r`` and coefficients ``alpha1..4``."""
    u = gamma + c_f - f
    us = gamma - c_f + f
    if not us > 0:
        raise StabilityViolationError(
            f"U* = gamma - C_f + F = {us:g} <= 0; the relay cannot dominate friction")
    if not u > us:
        raise StabilityViolationError(f"need U > U*, got U={u:g}, U*={us:g} (F >= C_f)")
    r = math.sqrt(us / u)
    a1 = 1.0 / u
    a2 = (1.0 / r + r) / (u * (1.0 - r))
    a3 = -1.0 / us
    a4 = a1 + a2 - a3
    return TwistingBounds(gamma, c_f, f, u, us, r, (a1, a2, a3, a4))


def v_twisting(x, b):
    x1, x2 = _xy(x)
    a1, a2, a3, a4 = b.alpha
    if x1 * x2 > 0:
        return a1 * abs(x2) + a2 * math.sqrt(x2 * x2 + 2.0 * b.u_upper * abs(x1))
    return a3 * abs(x2) + a4 * math.sqrt(x2 * x2 + 2.0 * b.u_lower * abs(x1))


def v_twisting_array(x1, x2, b):
    """Vectorized :func:`v_twisting`."""
    x1 = np.asarray(x1, float)
    x2 = np.asarray(x2, float)
    a1, a2, a3, a4 = b.alpha
    same = x1 * x2 > 0
    v_same = a1 * np.abs(x2) + a2 * np.sqrt(x2 * x2 + 2.0 * b.u_upper * np.abs(x1))
    v_opp = a3 * np.abs(x2) + a4 * np.sqrt(x2 * x2 + 2.0 * b.u_lower * np.abs(x1))
    return np.where(same, v_same, v_opp)


QUADRANTS = ("I/III", "II/IV")


def vdot_bound(b, quadrant):
    if quadrant == "I/III":
        return -1.0
    if quadrant == "II/IV":
        return -(b.gamma - b.c_f - b.f) / (b.gamma + b.c_f + b.f)
    raise ValueError(f"quadrant must be one of {QUADRANTS}, got {quadrant!r}")


def convergence_time_bound(x0, b):
    """Upper bound on the settling time from ``x0``.

    ``V(x0)`` when ``x1 x2 > 0``; ``r^2 V(x0)`` otherwise, including the
    start at rest on the ``x1`` axis.
    """
    x1, x2 = _xy(x0)
    v = v_twisting((x1, x2), b)
    if x1 * x2 > 0:
        return v
    return b.r * b.r * v


def rest_start_bound(gamma, c_f, x1_0):
    """Closed-form settling bound for a start at rest, ``F = 0``."""
    if not gamma > c_f:
        raise StabilityViolationError(f"need gamma > C_f, got gamma={gamma:g}, C_f={c_f:g}")
    q = math.sqrt((gamma - c_f) / (gamma + c_f))
    return gamma * (1.0 + q) / (gamma * c_f + c_f * c_f) * math.sqrt(2.0 * (gamma - c_f) * abs(x1_0))


def v_reduced(x, gamma):
    x1, x2 = _xy(x)
    return 0.5 * x2 * x2 + gamma * abs(x1)


def v_reduced_rate(x, c_f):
    """Rate of ``V_f`` along the reduced loop, ``-x2 f``.

    Uses the presliding map when ``x`` carries a presliding state in the
    presliding regime, otherwise the Coulomb value ``C_f sign(x2)``.
    """
    x1, x2 = _xy(x)
    ps = getattr(x, "presliding", None)
    if ps is not None and ps.regime.value == "presliding":
        direction = 1.0 if x2 >= 0 else -1.0
        fp = abs(direction - ps.f_r) * presliding_branch(ps.z) + ps.f_r
        return -c_f * x2 * fp
    return -c_f * abs(x2)


@dataclass
class DecreaseReport:
    max_observed_rate: dict
    bound: dict
    violations: list
    samples_used: dict
    exclusion_band: float

    @property
    def ok(self):
        return not self.violations


def verify_decrease(traj, b, exclusion_band=None, bound_scale=1.0, rate_tol=1e-6):
    """Check the twisting rate bounds along ``traj`` by finite differences.

    Only pairs of consecutive samples lying in the same quadrant class with
    ``min(|x1|, |x2|)`` above ``exclusion_band`` are used.  By default the band
    is two local steps of travel per sample: ``2 h |x2|`` in ``x1`` and
    ``2 h U`` in ``x2``.  A pair violates
    the bound when ``dV/dt > scale * bound + rate_tol + dt``.
    """
    sc = traj.scenario
    p = sc.plant
    if p.k != 0 or p.c != 0 or p.presliding or p.actuator_lag is not None:
        raise PreconditionError(
            "rate bounds apply to k = c = 0 with discontinuous friction and no lag")
    t, x1, x2 = traj.t, traj.x1, traj.x2
    if exclusion_band is None:
        # two local steps of travel: |x2| h along x1, U h along x2
        h = np.diff(t)
        h = np.maximum(np.append(h, 0.0), np.insert(h, 0, 0.0)) if len(t) > 1 else np.zeros(len(t))
        eps1 = 2.0 * h * np.abs(x2)
        eps2 = 2.0 * h * b.u_upper
        exclusion_band = float(max(np.max(eps1), np.max(eps2))) if len(t) else 0.0
    else:
        eps1 = eps2 = exclusion_band
    v = v_twisting_array(x1, x2, b)
    ok = (np.abs(x1) > eps1) & (np.abs(x2) > eps2)
    quad = np.where(x1 * x2 > 0, 0, 1)
    pair = ok[:-1] & ok[1:] & (quad[:-1] == quad[1:]) & (np.diff(t) > 0)
    dt = np.diff(t)
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = np.diff(v) / dt
    maxima, bounds, used, violations = {}, {}, {}, []
    for qi, name in enumerate(QUADRANTS):
        sel = pair & (quad[:-1] == qi)
        n_samples = int(np.count_nonzero(ok & (quad == qi)))
        used[name] = n_samples
        if n_samples < 3 or not sel.any():
            raise InsufficientDataError(
                f"only {n_samples} usable samples in quadrants {name} (need >= 3)")
        bound = bound_scale * vdot_bound(b, name)
        bounds[name] = bound
        maxima[name] = float(np.max(rate[sel]))
        bad = sel & (rate > bound + rate_tol + dt)
        for i in np.flatnonzero(bad):
            violations.append((float(t[i + 1]), float(rate[i]), bound))
    violations.sort()
    return DecreaseReport(maxima, bounds, violations, used, exclusion_band)
