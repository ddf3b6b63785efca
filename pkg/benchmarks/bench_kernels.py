"""Compare the compiled and pure-Python stepping kernels.

    python benchmarks/bench_kernels.py [--repeat N]

Runs the same scenarios through both backends, checks the trajectories
agree, and prints wall time per run and the speed-up.
"""

import argparse
import importlib
import os
import subprocess
import sys
import time

import numpy as np

SCENARIOS = {
    "twisting (C_f=1, gamma=1.5)": "twisting-baseline",
    "presliding cycle (C_f=50, s=500)": "fig4-limit-cycle",
    "lab plant, relay on": "lab-4mm-relay",
    "actuator lag chatter": "twisting-lag",
}

_CHILD = r"""
import sys, time, json
import numpy as np
from frictioncomp.config import parse_config
from frictioncomp.integrator import integrate
from frictioncomp import kernels
preset, repeat = sys.argv[1], int(sys.argv[2])
sc = parse_config("preset: " + preset + "\n").scenario()
times = []
for _ in range(repeat):
    t0 = time.perf_counter()
    tr = integrate(sc)
    times.append(time.perf_counter() - t0)
np.save(sys.argv[3], np.column_stack([tr.t, tr.x1, tr.x2]))
print(json.dumps({"backend": kernels.BACKEND, "best": min(times), "events": len(tr.events)}))
"""


def run(preset, repeat, pure, out):
    env = dict(os.environ)
    if pure:
        env["FRICTIONCOMP_PURE_PYTHON"] = "1"
    else:
        env.pop("FRICTIONCOMP_PURE_PYTHON", None)
    res = subprocess.run([sys.executable, "-c", _CHILD, preset, str(repeat), out],
                         env=env, capture_output=True, text=True, check=True)
    import json

    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--tmp", default="/tmp")
    args = ap.parse_args()
    if importlib.util.find_spec("frictioncomp._kernels") is None:
        sys.exit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    print(f"{'scenario':36s} {'events':>7s} {'cython [s]':>11s} {'python [s]':>11s} "
          f"{'speed-up':>9s} {'max |dx1|':>10s}")
    for label, preset in SCENARIOS.items():
        fc = os.path.join(args.tmp, f"bench_c_{preset}.npy")
        fp = os.path.join(args.tmp, f"bench_p_{preset}.npy")
        rc = run(preset, args.repeat, False, fc)
        rp = run(preset, max(1, args.repeat // 3), True, fp)
        assert rc["backend"] == "cython" and rp["backend"] == "python"
        a, b = np.load(fc), np.load(fp)
        diff = np.max(np.abs(a[:, 1] - b[:, 1])) if a.shape == b.shape else float("nan")
        print(f"{label:36s} {rc['events']:7d} {rc['best']:11.4f} {rp['best']:11.4f} "
              f"{rp['best'] / rc['best']:8.1f}x {diff:10.2e}")


if __name__ == "__main__":
    t0 = time.perf_counter()
    main()
    print(f"total {time.perf_counter() - t0:.1f} s")
