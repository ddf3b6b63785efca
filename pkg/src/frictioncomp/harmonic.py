"""Describing-function analysis of the relay compensator plus Coulomb friction.

Both relays are lumped into one quasi-linear gain
``N(a1) = 4 / (pi a1) (gamma + j C_f)``.  Because ``a1`` only scales ``N``,
the balance ``1 + N(a1) G(jw) = 0`` splits into an amplitude-free phase
condition for ``w`` and a closed-form amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, InconclusiveError, SingularityError
from .integrator import Termination, integrate


@dataclass(frozen=True)
class LinearPlant:
    """Rational ``G(s) = num(s) / den(s)``, coefficients highest power first."""

    num: tuple
    den: tuple

    def __post_init__(self):
        num = tuple(float(v) for v in np.trim_zeros(np.atleast_1d(self.num), "f"))
        den = tuple(float(v) for v in np.trim_zeros(np.atleast_1d(self.den), "f"))
        if not num or not den:
            raise DomainError("numerator and denominator must be non-zero")
        if len(den) - len(num) < 2:
            raise DomainError("plant must have relative degree >= 2")
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def relative_degree(self):
        return len(self.den) - len(self.num)

    @classmethod
    def second_order(cls, k, c, lag=None):
        den = np.array([1.0, c, k])
        if lag is not None:
            den = np.polymul(den, [lag, 1.0])
        return cls((1.0,), tuple(den))

    @classmethod
    def from_plant_params(cls, p):
        return cls.second_order(p.k, p.c, p.actuator_lag)


def describing_function(a1, gamma, c_f):
    if not a1 > 0:
        raise DomainError(f"amplitude must be positive, got {a1}")
    return 4.0 / (math.pi * a1) * complex(gamma, c_f)


def plant_response(g, omega):
    if not omega > 0:
        raise DomainError(f"omega must be positive, got {omega}")
    s = 1j * omega
    d = np.polyval(g.den, s)
    scale = sum(abs(a) * omega ** i for i, a in enumerate(reversed(g.den)))
    if abs(d) <= 1e-14 * scale:
        raise SingularityError(f"G(s) has a pole at s = {s}")
    return complex(np.polyval(g.num, s) / d)


@dataclass
class HarmonicBalanceSolution:
    exists: bool
    omega_bar: float | None = None
    a1: float | None = None
    phase_margin_evidence: float | None = None
    balance_residual: float | None = None
    certificate: str = ""
    roots: list = field(default_factory=list)


def target_phase(gamma, c_f):
    """Direction of the critical ray ``-1/N``: ``pi - atan(C_f / gamma)``."""
    return math.pi - math.atan2(c_f, gamma)


def _wrap(a):
    return (a + math.pi) % (2 * math.pi) - math.pi


def solve_harmonic_balance(g, gamma, c_f, omega_range=(1e-3, 1e6), points_per_decade=400):
    """Solve the phase condition on a log grid, then the amplitude.

    Sign changes of ``Im(G e^{-j theta})`` with ``Re(G e^{-j theta}) > 0``
    bracket intersections of the Nyquist curve with the critical ray; each
    bracket is refined with Brent's method.  Without a root the smallest
    grid phase residual is returned as evidence.
    """
    if gamma < 0 or c_f < 0:
        raise DomainError("gamma and C_f must be >= 0")
    if gamma == 0 and c_f == 0:
        raise DomainError("gamma and C_f cannot both be zero")
    theta = target_phase(gamma, c_f)
    rot = complex(math.cos(theta), -math.sin(theta))
    lo, hi = omega_range
    n = int(points_per_decade * math.log10(hi / lo)) + 1
    grid = np.logspace(math.log10(lo), math.log10(hi), n)

    def resp(w):
        try:
            return plant_response(g, w)
        except SingularityError:
            return complex("nan")

    vals = np.array([resp(w) for w in grid]) * rot
    im, re = vals.imag, vals.real
    roots = []
    for i in range(n - 1):
        if not (np.isfinite(im[i]) and np.isfinite(im[i + 1])):
            continue
        if im[i] == 0 and re[i] > 0:
            roots.append(float(grid[i]))
            continue
        if im[i] * im[i + 1] < 0:
            w = brentq(lambda x: (resp(x) * rot).imag, grid[i], grid[i + 1],
                       xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500)
            if (resp(w) * rot).real > 0:
                roots.append(float(w))
    phases = np.angle(vals)
    finite = np.isfinite(phases)
    evidence = float(np.min(np.abs(phases[finite]))) if finite.any() else math.nan
    if not roots:
        cert = (f"no phase crossing of arg G(jw) = {theta:.12g} rad on "
                f"[{lo:g}, {hi:g}] rad/s ({n} log-spaced points); minimum phase "
                f"residual {evidence:.3e} rad.")
        if g.relative_degree == 2 and len(g.den) == 3 and all(a > 0 for a in g.den):
            cert += (" Analytic: a damped second-order plant has arg G in (-pi, 0) for all"
                     " w > 0 while the critical ray lies at arg in [-3pi/2, -pi], so"
                     " no intersection exists for C_f > 0.")
        return HarmonicBalanceSolution(False, phase_margin_evidence=evidence, certificate=cert)
    w = roots[0]
    gw = plant_response(g, w)
    a1 = 4.0 / math.pi * abs(gw) * math.hypot(gamma, c_f)
    resid = abs(describing_function(a1, gamma, c_f) * gw + 1.0)
    return HarmonicBalanceSolution(True, w, a1, phase_margin_evidence=0.0,
                                   balance_residual=resid,
                                   certificate=f"phase crossing at w = {w:.15g} rad/s",
                                   roots=roots)


@dataclass
class ChatterReport:
    prediction: HarmonicBalanceSolution
    termination: str
    oscillating: bool
    sim_omega: float | None
    sim_a1: float | None
    deviations: dict

    def as_dict(self):
        pr = self.prediction
        return {
            "exists": pr.exists,
            "omega_bar": pr.omega_bar,
            "a1": pr.a1,
            "phase_margin_evidence": pr.phase_margin_evidence,
            "balance_residual": pr.balance_residual,
            "certificate": pr.certificate,
            "termination": self.termination,
            "oscillating": self.oscillating,
            "sim_omega": self.sim_omega,
            "sim_a1": self.sim_a1,
            "deviations": self.deviations,
        }


def predict_chatter_and_validate(scenario, tail_fraction=0.5, steady_tol=0.05):
    """Describing-function prediction next to the simulated oscillation.

    The steady tone is measured on the last ``tail_fraction`` of the run and
    compared with the preceding window of equal length; a frequency or
    amplitude drift above ``steady_tol`` raises :class:`InconclusiveError`.
    """
    from .analysis import oscillation_spectrum

    p = scenario.plant
    if p.presliding:
        raise DomainError("chatter prediction assumes discontinuous friction")
    pred = solve_harmonic_balance(LinearPlant.from_plant_params(p), p.gamma, p.c_f)
    traj = integrate(scenario)
    if traj.termination is not Termination.TIME_UP:
        dev = {"omega": None, "a1": None} if not pred.exists else {"omega": math.inf,
                                                                  "a1": math.inf}
        return ChatterReport(pred, traj.termination.value, False, None, None, dev)
    w, a = oscillation_spectrum(traj, tail_fraction=tail_fraction / 2)
    t_cut = traj.t_final - tail_fraction / 2 * (traj.t_final - traj.t[0])
    head = _truncate(traj, t_cut)
    w0, a0 = oscillation_spectrum(head, tail_fraction=(tail_fraction / 2) / (1 - tail_fraction / 2))
    if abs(w - w0) > steady_tol * w or abs(a - a0) > steady_tol * a:
        raise InconclusiveError(
            f"oscillation not steady: ({w0:.4g}, {a0:.3g}) -> ({w:.4g}, {a:.3g})")
    dev = {"omega": None, "a1": None}
    if pred.exists:
        dev = {"omega": abs(w - pred.omega_bar) / pred.omega_bar,
               "a1": abs(a - pred.a1) / pred.a1}
    return ChatterReport(pred, traj.termination.value, True, w, a, dev)


def _truncate(traj, t_cut):
    from dataclasses import replace

    m = traj.t <= t_cut
    cols = {name: getattr(traj, name)[m] for name in
            ("t", "x1", "x2", "u", "f", "z", "regime", "motion", "actuator",
             "work_f", "work_u")}
    return replace(traj, events=[e for e in traj.events if e.t <= t_cut], **cols)
