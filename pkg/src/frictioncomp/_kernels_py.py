"""Pure-Python smooth-phase stepping kernel.

Mirrors ``_kernels.pyx`` line for line; it is imported when the compiled
extension is unavailable or ``FRICTIONCOMP_PURE_PYTHON`` is set.

State vector ``y`` (length ``NY``): x1, x2, z, actuator, friction work
``int f x2 dt``, relay work ``int u x2 dt``.  The parameter vector layout is
given by the ``P_*`` indices.  Between events the discrete mode is frozen in
the parameter vector, so the right-hand side is smooth.  ``P_REST > 0``
arms the rest-capture guard around the mode's equilibrium ``P_XEQ``.
"""

import math

import numpy as np

NY = 6
(P_K, P_C, P_CF, P_GAMMA, P_S, P_LAG, P_RELAY, P_VEL, P_MODE, P_FR,
 P_RTOL, P_ATOL, P_HMAX, P_HMIN, P_RADIUS, P_WX1, P_XEQ, P_REST, NPAR) = range(19)

MODE_FIXED = 0       # friction = C_f * vel_sign (Coulomb or sliding branch)
MODE_PRESLIDING = 1  # presliding branch with memory f_r
MODE_STUCK = 2       # x frozen, only the actuator filter evolves

STATUS_DONE = 0
STATUS_GUARD = 1
STATUS_FULL = 2
STATUS_UNDERFLOW = 3
STATUS_NONFINITE = 4

# Dormand-Prince 5(4)
_C2, _C3, _C4, _C5 = 1 / 5, 3 / 10, 4 / 5, 8 / 9
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71 / 57600, -71 / 16695, 71 / 1920,
                                -17253 / 339200, 22 / 525, -1 / 40)

BACKEND = "python"


def branch(z):
    if z == 0.0:
        return 0.0
    return z * (1.0 - math.log(abs(z)))


def forces(y, p):
    """Return ``(u, f)``: applied input and friction value at ``y``."""
    relay = -p[P_GAMMA] * p[P_RELAY]
    u = y[3] if p[P_LAG] > 0.0 else relay
    mode = p[P_MODE]
    if mode == MODE_STUCK:
        f = -p[P_K] * y[0] + u
    elif mode == MODE_PRESLIDING:
        f = p[P_CF] * (abs(p[P_VEL] - p[P_FR]) * branch(y[2]) + p[P_FR])
    else:
        f = p[P_CF] * p[P_VEL]
    return u, f


def rhs(y, p):
    relay = -p[P_GAMMA] * p[P_RELAY]
    lag = p[P_LAG]
    da = (relay - y[3]) / lag if lag > 0.0 else 0.0
    if p[P_MODE] == MODE_STUCK:
        return [0.0, 0.0, 0.0, da, 0.0, 0.0]
    u, f = forces(y, p)
    x2 = y[1]
    dz = p[P_S] * x2 if p[P_MODE] == MODE_PRESLIDING else 0.0
    return [x2, -p[P_K] * y[0] - p[P_C] * x2 - f + u, dz, da, f * x2, u * x2]


def _dp(y, h, p):
    k1 = rhs(y, p)
    y2 = [y[i] + h * _A21 * k1[i] for i in range(NY)]
    k2 = rhs(y2, p)
    y3 = [y[i] + h * (_A31 * k1[i] + _A32 * k2[i]) for i in range(NY)]
    k3 = rhs(y3, p)
    y4 = [y[i] + h * (_A41 * k1[i] + _A42 * k2[i] + _A43 * k3[i]) for i in range(NY)]
    k4 = rhs(y4, p)
    y5 = [y[i] + h * (_A51 * k1[i] + _A52 * k2[i] + _A53 * k3[i] + _A54 * k4[i])
          for i in range(NY)]
    k5 = rhs(y5, p)
    y6 = [y[i] + h * (_A61 * k1[i] + _A62 * k2[i] + _A63 * k3[i] + _A64 * k4[i]
                      + _A65 * k5[i]) for i in range(NY)]
    k6 = rhs(y6, p)
    ynew = [y[i] + h * (_B1 * k1[i] + _B3 * k3[i] + _B4 * k4[i] + _B5 * k5[i]
                        + _B6 * k6[i]) for i in range(NY)]
    k7 = rhs(ynew, p)
    rtol, atol = p[P_RTOL], p[P_ATOL]
    acc = 0.0
    for i in range(NY):
        e = h * (_E1 * k1[i] + _E3 * k3[i] + _E4 * k4[i] + _E5 * k5[i]
                 + _E6 * k6[i] + _E7 * k7[i])
        sc = atol + rtol * max(abs(y[i]), abs(ynew[i]))
        acc += (e / sc) ** 2
    return ynew, math.sqrt(acc / NY)


def step(y, h, p):
    """One Dormand-Prince step of length ``h`` from ``y``; returns the new state."""
    ynew, _ = _dp(list(y), h, p)
    return np.array(ynew)


def crossed(y, p):
    """True when any guard of the frozen mode has reached or passed zero."""
    if p[P_MODE] == MODE_STUCK:
        u = y[3] if p[P_LAG] > 0.0 else -p[P_GAMMA] * p[P_RELAY]
        return abs(-p[P_K] * y[0] + u) > p[P_CF]
    if y[0] * p[P_RELAY] <= 0.0 or y[1] * p[P_VEL] <= 0.0:
        return True
    if p[P_MODE] == MODE_PRESLIDING and abs(y[2]) >= 1.0:
        return True
    if p[P_REST] > 0.0 and math.hypot(math.sqrt(p[P_K]) * (y[0] - p[P_XEQ]), y[1]) <= p[P_REST]:
        return True
    return math.hypot(p[P_WX1] * y[0], y[1]) <= p[P_RADIUS]


def advance(y0, t0, t_stop, h, p, max_steps):
    """Integrate with error control until a guard trips, ``t_stop`` or ``max_steps``.

    Returns ``(status, ts, ys, h_next)`` where ``ts``/``ys`` hold the accepted
    step ends (the initial point excluded).  On ``STATUS_GUARD`` the last row
    is the first step end past the event; the bracket start is the row before
    it (or ``y0``).
    """
    p = list(p)
    y = list(y0)
    t = t0
    hmax, hmin = p[P_HMAX], p[P_HMIN]
    ts = []
    ys = []
    status = STATUS_DONE
    h = min(h, hmax)
    while True:
        if t >= t_stop:
            status = STATUS_DONE
            break
        if len(ts) >= max_steps:
            status = STATUS_FULL
            break
        last = False
        if t + h >= t_stop:
            h = t_stop - t
            last = True
        ynew, err = _dp(y, h, p)
        if not all(math.isfinite(v) for v in ynew) or not math.isfinite(err):
            if h <= hmin:
                status = STATUS_NONFINITE
                break
            h *= 0.25
            continue
        if err <= 1.0:
            t = t_stop if last else t + h
            y = ynew
            ts.append(t)
            ys.append(ynew)
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
            h = min(hmax, h * max(fac, 0.2))
            if crossed(y, p):
                status = STATUS_GUARD
                break
        else:
            h *= max(0.2, 0.9 * err ** -0.2)
            if h < hmin:
                status = STATUS_UNDERFLOW
                break
    if ys:
        out = np.array(ys, dtype=float)
    else:
        out = np.empty((0, NY))
    return status, np.array(ts, dtype=float), out, h
