"""Deterministic serialization of trajectories, events and reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .integrator import MOTION_LABELS, REGIME_LABELS

TRAJECTORY_COLUMNS = ("t", "x1", "x2", "u", "f", "z", "regime", "motion")
EVENT_COLUMNS = ("t", "kind", "x1_before", "x2_before", "x1_after", "x2_after",
                 "z_after", "f_r_after", "regime_after", "motion_after")


def fmt(v):
    return format(float(v), ".17g")


def write_trajectory_csv(traj, path):
    path = Path(path)
    cols = [traj.t, traj.x1, traj.x2, traj.u, traj.f, traj.z]
    reg = [REGIME_LABELS[int(r)] for r in traj.regime]
    mot = [MOTION_LABELS[int(m)] for m in traj.motion]
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for i in range(len(traj.t)):
            w.writerow([fmt(c[i]) for c in cols] + [reg[i], mot[i]])
    return path


def write_events_csv(traj, path):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EVENT_COLUMNS)
        for ev in traj.events:
            a, b = ev.state_before, ev.state_after
            ps = b.presliding
            w.writerow([fmt(ev.t), ev.kind.value, fmt(a.x1), fmt(a.x2), fmt(b.x1),
                        fmt(b.x2), fmt(ps.z) if ps else "", fmt(ps.f_r) if ps else "",
                        ps.regime.value if ps else "none", b.motion.value])
    return path


def read_trajectory_csv(path):
    """Load a trajectory CSV into a dict of arrays (labels kept as strings)."""
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    out = {}
    for name in TRAJECTORY_COLUMNS:
        vals = [r[name] for r in rows]
        out[name] = np.array(vals) if name in ("regime", "motion") else np.array(vals, float)
    return out


def jsonable(obj):
    """Recursively convert to JSON-safe values; non-finite floats become strings."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list | tuple):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, bool | np.bool_):
        return bool(obj)
    if isinstance(obj, int | np.integer):
        return int(obj)
    if isinstance(obj, float | np.floating):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if hasattr(obj, "value") and isinstance(obj.value, str):
        return obj.value
    return obj


def write_json(obj, path):
    path = Path(path)
    path.write_text(json.dumps(jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path
