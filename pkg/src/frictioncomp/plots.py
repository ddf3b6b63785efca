"""SVG plots of trajectories with event markers (byte-reproducible)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .errors import PreconditionError  # noqa: E402
from .integrator import EventKind  # noqa: E402

PLOT_KINDS = ("timeseries", "phase_plane", "friction_displacement")

_MARKERS = {
    EventKind.VELOCITY_REVERSAL: ("v", "tab:red"),
    EventKind.RELAY_SWITCH: ("|", "tab:green"),
    EventKind.STICK_ENTRY: ("s", "black"),
    EventKind.STICK_EXIT: ("D", "gray"),
    EventKind.PRESLIDING_TO_SLIDING: ("^", "tab:purple"),
    EventKind.SLIDING_TO_PRESLIDING: ("x", "tab:orange"),
}
_MAX_MARKERS = 400  # per kind, keeps the SVG small for long chattering runs


def _events_by_kind(traj):
    out = {}
    for ev in traj.events:
        out.setdefault(ev.kind, []).append(ev)
    return out


def emit_plot(traj, kind, path):
    if len(traj.t) == 0:
        raise PreconditionError("cannot plot an empty trajectory")
    if kind not in PLOT_KINDS:
        raise ValueError(f"kind must be one of {PLOT_KINDS}, got {kind!r}")
    path = Path(path)
    with plt.rc_context({"svg.hashsalt": "frictioncomp", "svg.fonttype": "path"}):
        fig = plt.figure(figsize=(7, 4.5))
        try:
            if kind == "timeseries":
                _timeseries(fig, traj)
            elif kind == "phase_plane":
                _phase(fig, traj)
            else:
                _friction(fig, traj)
            fig.tight_layout()
            fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    return path


def _timeseries(fig, traj):
    ax1, ax2 = fig.subplots(2, 1, sharex=True)
    ax1.plot(traj.t, traj.x1, lw=0.8)
    ax1.set_ylabel("x1 [m]")
    ax2.plot(traj.t, traj.x2, lw=0.8, color="tab:orange")
    ax2.set_ylabel("x2 [m/s]")
    ax2.set_xlabel("t [s]")
    for k, evs in _events_by_kind(traj).items():
        m, c = _MARKERS[k]
        evs = evs[-_MAX_MARKERS:]
        ax1.plot([e.t for e in evs], [e.state_after.x1 for e in evs], m, color=c, ms=3,
                 ls="none", label=k.value)
    if traj.events:
        ax1.legend(fontsize=6, loc="upper right")
    for ax in (ax1, ax2):
        ax.grid(True, lw=0.3)


def _phase(fig, traj):
    ax = fig.subplots()
    ax.plot(traj.x1, traj.x2, lw=0.8)
    ax.plot([traj.x1[0]], [traj.x2[0]], "o", color="tab:green", ms=4, label="start")
    ax.plot([0.0], [0.0], "+", color="black", ms=8)
    for k, evs in _events_by_kind(traj).items():
        m, c = _MARKERS[k]
        evs = evs[-_MAX_MARKERS:]
        ax.plot([e.state_after.x1 for e in evs], [e.state_after.x2 for e in evs], m,
                color=c, ms=3, ls="none", label=k.value)
    ax.set_xlabel("x1 [m]")
    ax.set_ylabel("x2 [m/s]")
    ax.legend(fontsize=6)
    ax.grid(True, lw=0.3)


def _friction(fig, traj):
    ax = fig.subplots()
    ax.plot(traj.x1, traj.f, lw=0.8, color="tab:brown")
    rev = [e for e in traj.events if e.kind is EventKind.VELOCITY_REVERSAL][-_MAX_MARKERS:]
    if rev:
        tr = np.array([e.t for e in rev])
        ax.plot([e.state_after.x1 for e in rev], np.interp(tr, traj.t, traj.f), "v",
                color="tab:red", ms=3, ls="none", label="reversal")
        ax.legend(fontsize=6)
    ax.set_xlabel("x1 [m]")
    ax.set_ylabel("friction f [m/s^2]")
    ax.grid(True, lw=0.3)
