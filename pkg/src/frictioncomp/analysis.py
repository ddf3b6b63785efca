"""Post-processing of trajectories: reversals, limit cycles, errors, spectra."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import CycleError, InconclusiveError, InsufficientDataError, UnboundedSetError
from .integrator import EventKind, Termination
from .plant import invariant_set


@dataclass(frozen=True)
class ReversalRecord:
    t: float
    x1: float
    f_p: float  # normalized friction at the reversal


def _c_f(traj):
    return traj.scenario.plant.c_f if traj.scenario is not None else 1.0


def detect_reversals(traj):
    """One record per velocity reversal event, in time order."""
    out = []
    cf = _c_f(traj)
    for ev in traj.events_of(EventKind.VELOCITY_REVERSAL):
        ps = ev.state_after.presliding
        if ps is not None:
            fp = ps.f_r
        else:
            # friction on the incoming branch: last sample strictly before the event
            i = int(np.searchsorted(traj.t, ev.t, side="left"))
            fp = float(traj.f[max(i - 1, 0)]) / cf
        out.append(ReversalRecord(ev.t, ev.state_after.x1, fp))
    return out


def turning_points(traj):
    """Times and positions where the motion turns (reversal or stick entry).

    Falls back to local extrema of the sampled ``x1`` when the trajectory
    carries no event log.
    """
    kinds = (EventKind.VELOCITY_REVERSAL, EventKind.STICK_ENTRY)
    evs = traj.events_of(*kinds)
    if evs:
        return (np.array([e.t for e in evs]), np.array([e.state_after.x1 for e in evs]))
    x = np.asarray(traj.x1)
    t = np.asarray(traj.t)
    d = np.diff(x)
    idx = np.flatnonzero(d[:-1] * d[1:] < 0) + 1
    ts, xs = [], []
    for i in idx:
        # vertex of the parabola through three samples
        t0, t1, t2 = t[i - 1], t[i], t[i + 1]
        y0, y1, y2 = x[i - 1], x[i], x[i + 1]
        den = (t0 - t1) * (t0 - t2) * (t1 - t2)
        a = (t2 * (y1 - y0) + t1 * (y0 - y2) + t0 * (y2 - y1)) / den
        b = (t2 * t2 * (y0 - y1) + t1 * t1 * (y2 - y0) + t0 * t0 * (y1 - y2)) / den
        if a == 0:
            ts.append(t1)
            xs.append(y1)
            continue
        tv = -b / (2 * a)
        c = y0 - a * t0 * t0 - b * t0
        ts.append(tv)
        xs.append(a * tv * tv + b * tv + c)
    return np.array(ts), np.array(xs)


@dataclass
class LimitCycleReport:
    detected: bool
    amplitude: float
    period: float
    reversal_amplitude_sequence: list
    contraction_ratio: float
    last_changes: list


def detect_limit_cycle(traj, rel_tol=0.01, n_check=3):
    """Decide whether the motion has settled onto a steady oscillation.

    The half peak-to-peak travel between consecutive turning points forms
    the amplitude sequence; detection requires the last ``n_check`` relative
    changes to be below ``rel_tol``.
    """
    t_tp, x_tp = turning_points(traj)
    if len(t_tp) < 6:
        if traj.termination is Termination.CONVERGED:
            return LimitCycleReport(False, 0.0, 0.0, [], math.nan, [])
        raise InsufficientDataError(f"{len(t_tp)} turning points, need at least 6")
    amps = 0.5 * np.abs(np.diff(x_tp))
    changes = np.abs(np.diff(amps)) / np.maximum(amps[1:], np.finfo(float).tiny)
    last = changes[-n_check:]
    d = np.diff(amps)
    tail = d[-(n_check + 1):]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(tail[1:] / tail[:-1])
    if np.all(np.abs(tail) <= 1e-9 * np.max(amps)):
        contraction = 0.0  # steady to round-off
    else:
        ratios = ratios[np.isfinite(ratios)]
        contraction = float(np.median(ratios)) if len(ratios) else math.nan
    t0, t1 = t_tp[-3], t_tp[-1]
    sel = (traj.t >= t0) & (traj.t <= t1)
    seg = traj.x1[sel] if sel.any() else x_tp[-3:]
    seg = np.concatenate([seg, x_tp[-3:]])
    amplitude = 0.5 * float(np.max(seg) - np.min(seg))
    period = float(t1 - t0)
    detected = (traj.termination is not Termination.CONVERGED
                and amplitude > 0 and period > 0
                and bool(np.all(last < rel_tol))
                and (contraction < 1 or math.isnan(contraction)))
    return LimitCycleReport(detected, amplitude, period, amps.tolist(), contraction,
                            last.tolist())


@dataclass
class SteadyStateError:
    window: tuple
    mean_abs_error: float
    band: tuple | None


def steady_state_error(traj, reference=0.0, window_fraction=0.2, t_end=None):
    """Time-averaged ``|x1 - reference|`` over the trailing window.

    A run that stopped early (converged or stuck) holds its terminal state
    until ``t_end`` (the scenario end by default).
    """
    if not 0 < window_fraction < 1:
        raise ValueError("window_fraction must lie in (0, 1)")
    if t_end is None:
        t_end = traj.scenario.t_end if traj.scenario is not None else traj.t_final
    t = np.asarray(traj.t)
    e = np.abs(np.asarray(traj.x1) - reference)
    if t_end > t[-1]:
        t = np.append(t, t_end)
        e = np.append(e, e[-1])
    t0 = t_end * (1.0 - window_fraction)
    grid = np.concatenate([[t0], t[(t > t0) & (t < t_end)], [t_end]])
    ev = np.interp(grid, t, e)
    if traj.termination is not Termination.TIME_UP:
        # frozen after termination: hold, do not interpolate toward a phantom sample
        ev = np.where(grid >= traj.t_final, e[-1], ev)
    mean = float(np.trapezoid(ev, grid) / (t_end - t0))
    band = None
    if traj.scenario is not None:
        try:
            iv = invariant_set(traj.scenario.plant)
            band = (iv.lo, iv.hi)
        except UnboundedSetError:
            band = None
    return SteadyStateError((t0, t_end), mean, band)


def _interp_at(traj, col, t):
    return float(np.interp(t, traj.t, col))


def hysteresis_loop_energy(traj, cycle, closure_tol=1e-2):
    """Energy dissipated by friction over ``cycle = (t1, t2)``: the integral of ``f dx1``.

    Requires the friction values at both ends to agree to ``closure_tol``
    relative to their magnitude.
    Uses the friction work column integrated alongside the states.
    """
    t1, t2 = map(float, cycle)
    if t2 < t1:
        raise ValueError("cycle must satisfy t1 <= t2")
    if t2 == t1:
        return 0.0
    f1, f2 = _interp_at(traj, traj.f, t1), _interp_at(traj, traj.f, t2)
    scale = max(abs(f1), abs(f2), 1e-12 * _c_f(traj))
    if abs(f1 - f2) > closure_tol * scale:
        raise CycleError(f"friction not closed over cycle: f({t1})={f1:.6g}, f({t2})={f2:.6g}")
    return _interp_at(traj, traj.work_f, t2) - _interp_at(traj, traj.work_f, t1)


@dataclass
class EnergyBalance:
    input_energy: float  # integral of u dx1
    dissipated: float  # integral of f dx1
    kinetic_change: float

    @property
    def relative_mismatch(self):
        scale = max(abs(self.input_energy), abs(self.dissipated), np.finfo(float).tiny)
        return abs(self.input_energy - self.dissipated - self.kinetic_change) / scale


def energy_balance(traj, t1, t2):
    """Relay input, friction dissipation and kinetic-energy change on ``[t1, t2]``."""
    w_u = _interp_at(traj, traj.work_u, t2) - _interp_at(traj, traj.work_u, t1)
    w_f = _interp_at(traj, traj.work_f, t2) - _interp_at(traj, traj.work_f, t1)
    v1, v2 = _interp_at(traj, traj.x2, t1), _interp_at(traj, traj.x2, t2)
    return EnergyBalance(w_u, w_f, 0.5 * (v2 * v2 - v1 * v1))


def oscillation_spectrum(traj, tail_fraction=0.5, min_cycles=3, snr=10.0, n_fft=2**18):
    """Dominant angular frequency and first-harmonic amplitude of ``x1``.

    The tail of the run is resampled uniformly; the periodogram peak is
    refined by a quadratic fit in log power, then polished by maximizing the
    magnitude of the Fourier sum, which also gives the amplitude.
    """
    if traj.termination is Termination.CONVERGED:
        raise InconclusiveError("trajectory converged; no steady oscillation")
    t = np.asarray(traj.t)
    t_hi = t[-1]
    t_lo = t_hi - tail_fraction * (t_hi - t[0])
    sel = t >= t_lo
    if np.count_nonzero(sel) < 16:
        raise InconclusiveError("too few samples in the tail window")
    n = n_fft
    dt = (t_hi - t_lo) / (n - 1)
    tu = t_lo + dt * np.arange(n)
    x = np.interp(tu, t, traj.x1)
    x = x - x.mean()
    if not np.any(x):
        raise InconclusiveError("flat signal")
    spec = np.abs(np.fft.rfft(x)) ** 2
    spec[0] = 0.0
    k = int(np.argmax(spec))
    floor = float(np.median(spec[1:])) if len(spec) > 2 else 0.0
    if k == 0 or spec[k] <= snr * floor:
        raise InconclusiveError("no dominant spectral peak above the noise floor")
    if k < min_cycles:
        raise InconclusiveError(f"only {k} cycles in the tail window")
    shift = 0.0
    if 0 < k < len(spec) - 1:
        a, b, c = np.log(spec[k - 1:k + 2] + np.finfo(float).tiny)
        den = a - 2 * b + c
        if den < 0:
            shift = 0.5 * (a - c) / den
    bin_w = 2 * np.pi / (n * dt)
    tau = tu - tu[0]

    def neg_amp(w):
        return -2.0 * abs(np.sum(x * np.exp(-1j * w * tau))) / n

    # the log-quadratic estimate is biased for a rectangular window; polish it
    # on the Fourier sum within half a bin
    w0 = bin_w * (k + shift)
    res = minimize_scalar(neg_amp, bounds=(w0 - 0.5 * bin_w, w0 + 0.5 * bin_w),
                          method="bounded", options={"xatol": 1e-6 * bin_w})
    omega, amp = (res.x, -res.fun) if -res.fun >= -neg_amp(w0) else (w0, -neg_amp(w0))
    return float(omega), float(amp)
