"""Relay gain tuning: bound curves, bound minimization and simulated sweeps."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DomainError, PreconditionError, SweepFailedError
from .integrator import Termination, integrate
from .lyapunov import convergence_time_bound, twisting_bounds

# time-optimal gain ratio quoted for the bound; kept as the comparison reference
REFERENCE_OPTIMAL_RATIO = 1.119


@dataclass
class GainSweepResult:
    grid: list
    bound_values: list
    sim_times: list | None = None
    argmin_bound: float | None = None
    argmin_sim: float | None = None
    monotonic_flag: bool = False
    terminations: list | None = field(default=None, repr=False)


def _check_grid(grid, strict_ratio=True):
    g = [float(v) for v in grid]
    if not g:
        raise DomainError("empty grid")
    if any(b <= a for a, b in zip(g, g[1:])):
        raise DomainError("grid must be strictly increasing")
    if strict_ratio and g[0] <= 1.0:
        raise DomainError(f"all ratios must exceed 1, got {g[0]}")
    if g[0] <= 0:
        raise DomainError("ratios must be positive")
    return g


def bound_at(c_f, x1_0, ratio):
    if ratio <= 1.0:
        return math.inf
    return convergence_time_bound((x1_0, 0.0), twisting_bounds(ratio * c_f, c_f))


def _monotone(values):
    d = np.diff(values)
    return bool(np.all(d > 0) or np.all(d < 0))


def bound_curve(c_f, x1_0, grid):
    g = _check_grid(grid)
    vals = [bound_at(c_f, x1_0, r) for r in g]
    return GainSweepResult(grid=g, bound_values=vals, argmin_bound=g[int(np.argmin(vals))],
                           monotonic_flag=_monotone(vals))


@dataclass
class BoundMinimum:
    kind: str  # "interior", "monotone-increasing", "monotone-decreasing", "boundary"
    ratio: float | None
    value: float | None
    interval: tuple
    boundary_behavior: str
    reference_ratio: float = REFERENCE_OPTIMAL_RATIO

    def summary(self):
        if self.kind == "interior":
            head = f"interior stationary point at gamma/C_f = {self.ratio:.6g} (T = {self.value:.6g})"
        else:
            head = f"no interior stationary point on {self.interval}: {self.kind}"
        return f"{head}; {self.boundary_behavior}; reference ratio {self.reference_ratio}"


def minimize_bound(c_f, x1_0, interval, objective=None, n_scan=4001):
    """Locate a stationary minimum of the bound over ``interval`` of ratios.

    ``objective(ratio)`` overrides the bound (used for self-tests).  A dense
    scan finds the smallest sampled value; an interior sample is refined by
    bounded scalar minimization, a boundary sample is reported as monotone
    behaviour rather than as an optimum.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if not lo > 1.0:
        raise DomainError(f"search interval must lie in (1, inf), got [{lo}, {hi}]")
    if not hi > lo:
        raise DomainError(f"empty interval [{lo}, {hi}]")
    fun = objective or (lambda r: bound_at(c_f, x1_0, r))
    xs = np.linspace(lo, hi, n_scan)
    ys = np.array([fun(x) for x in xs])
    i = int(np.argmin(ys))
    d = np.diff(ys)
    if 0 < i < n_scan - 1:
        res = minimize_scalar(fun, bounds=(xs[i - 1], xs[i + 1]), method="bounded",
                              options={"xatol": 1e-12})
        return BoundMinimum("interior", float(res.x), float(res.fun), (lo, hi),
                            "derivative changes sign inside the interval")
    if np.all(d > 0):
        kind = "monotone-increasing"
        behavior = (f"T increases with the ratio; T -> {fun(lo):.3g} at the left end "
                    "and the infimum is approached as gamma -> C_f+")
    elif np.all(d < 0):
        kind = "monotone-decreasing"
        behavior = f"T decreases with the ratio; infimum at the right end ({fun(hi):.3g})"
    else:
        kind = "boundary"
        behavior = "smallest sampled value on the boundary, curve not monotone"
    return BoundMinimum(kind, None, None, (lo, hi), behavior)


def _run_one(args):
    base, gamma = args
    traj = integrate(base.with_gamma(gamma))
    t = traj.t_final if traj.termination is Termination.CONVERGED else math.inf
    return t, traj.termination.value


def empirical_gain_sweep(base, grid, workers=None):
    """Simulated settling time for each ``gamma = ratio * C_f`` in ``grid``.

    Non-convergent runs (stuck or out of time) record ``inf``.  With
    ``workers > 1`` the runs are spread over processes; results keep grid
    order.
    """
    p = base.plant
    if p.k != 0 or p.c != 0 or p.presliding:
        raise PreconditionError("the sweep needs k = c = 0 and discontinuous friction")
    if base.x0.x2 != 0.0:
        raise PreconditionError("the sweep starts at rest, x0 = (x1, 0)")
    g = _check_grid(grid, strict_ratio=False)
    jobs = [(base, r * p.c_f) for r in g]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = list(ex.map(_run_one, jobs))
    else:
        out = [_run_one(j) for j in jobs]
    times = [t for t, _ in out]
    if not any(math.isfinite(t) for t in times):
        raise SweepFailedError("no grid point converged")
    bounds = [bound_at(p.c_f, base.x0.x1, r) for r in g]
    finite = [b for b in bounds if math.isfinite(b)]
    return GainSweepResult(
        grid=g, bound_values=bounds, sim_times=times,
        argmin_bound=g[int(np.argmin(bounds))] if finite else None,
        argmin_sim=g[int(np.argmin(times))],
        monotonic_flag=_monotone(finite) if len(finite) > 1 else False,
        terminations=[term for _, term in out])
