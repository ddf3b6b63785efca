"""Independent reference computations used by the tests.

Nothing here imports the package's integrator; the time-stepper is a
first-order Moreau scheme with the set-valued friction solved exactly at
each step, so it handles sticking without events.
"""

import math

import numpy as np


def sgn(x):
    return int(x > 0) - int(x < 0)


def moreau(k, c, c_f, gamma, x1, x2, t_end, h, lag=None):
    """Return arrays t, x1, x2 of the closed loop with Coulomb friction."""
    n = int(round(t_end / h))
    xs = np.empty(n + 1)
    vs = np.empty(n + 1)
    xs[0], vs[0] = x1, x2
    a = 0.0
    for i in range(n):
        x, v = xs[i], vs[i]
        relay = -gamma * sgn(x)
        if lag is not None:
            a += h * (relay - a) / lag
            u = a
        else:
            u = relay
        free = v + h * (-k * x + u)
        if abs(free) <= h * c_f:
            v_new = 0.0
        else:
            v_new = (free - h * c_f * sgn(free)) / (1.0 + h * c)
        vs[i + 1] = v_new
        xs[i + 1] = x + h * v_new
    return np.arange(n + 1) * h, xs, vs


def twisting_settling_time(gamma, c_f, x1_0):
    """Exact settling time of x'' = -gamma sign(x) - c_f sign(v) from rest.

    Each half swing is solved in closed form: accelerating towards the
    origin with (gamma - c_f), decelerating past it with (gamma + c_f).
    The geometric series of swings sums to a closed form.
    """
    a_in, a_out = gamma - c_f, gamma + c_f
    q = a_in / a_out  # ratio of successive |x1| extrema
    # time from rest at |x| = X to the next rest point: sqrt(2X/a_in) + sqrt(2X q / a_out)
    per = math.sqrt(2.0 / a_in) + math.sqrt(2.0 * q / a_out)
    return per * math.sqrt(abs(x1_0)) / (1.0 - math.sqrt(q))


def symmetric_presliding_cycle(c_f, s, d, n=2001):
    """Closed force-displacement loop for a symmetric stroke of half-width d.

    Returns (x, f) along the ascending branch and then the descending one.
    """
    from math import log

    def f0(z):
        return 0.0 if z == 0 else z * (1.0 - log(abs(z)))

    zmax = 2.0 * s * d
    g = f0(zmax)
    fr = g / (2.0 - g)  # steady reversal level, normalized
    zs = np.linspace(0.0, zmax, n)
    up = np.array([(1 + fr) * f0(z) - fr for z in zs])
    down = np.array([(1 + fr) * f0(-z) + fr for z in zs])
    x = np.concatenate([-d + zs / s, d - zs / s])
    f = c_f * np.concatenate([up, down])
    return x, f


def loop_area(x, f):
    """Line integral of f dx along the polyline (trapezoidal)."""
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(x)))
