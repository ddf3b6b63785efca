# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled smooth-phase stepping kernel.

Same contract as ``_kernels_py``; see that module for the state and
parameter layouts.  Operation order matches the Python version so both
backends produce the same numbers up to libm rounding.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, log, sqrt, hypot, isfinite, pow

cnp.import_array()

DEF NY_ = 6

NY = NY_
(P_K, P_C, P_CF, P_GAMMA, P_S, P_LAG, P_RELAY, P_VEL, P_MODE, P_FR,
 P_RTOL, P_ATOL, P_HMAX, P_HMIN, P_RADIUS, P_WX1, P_XEQ, P_REST, NPAR) = range(19)
MODE_FIXED = 0
MODE_PRESLIDING = 1
MODE_STUCK = 2
STATUS_DONE = 0
STATUS_GUARD = 1
STATUS_FULL = 2
STATUS_UNDERFLOW = 3
STATUS_NONFINITE = 4

BACKEND = "cython"

cdef struct Par:
    double k, c, cf, gamma, s, lag, relay, vel, fr, rtol, atol, hmax, hmin, radius, wx1, xeq, rest
    int mode

cdef double A21 = 1.0 / 5
cdef double A31 = 3.0 / 40, A32 = 9.0 / 40
cdef double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9
cdef double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187, A53 = 64448.0 / 6561, A54 = -212.0 / 729
cdef double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247, A64 = 49.0 / 176, A65 = -5103.0 / 18656
cdef double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192, B5 = -2187.0 / 6784, B6 = 11.0 / 84
cdef double E1 = 71.0 / 57600, E3 = -71.0 / 16695, E4 = 71.0 / 1920, E5 = -17253.0 / 339200, E6 = 22.0 / 525, E7 = -1.0 / 40


cdef Par _unpack(double[::1] p):
    cdef Par q
    q.k = p[0]; q.c = p[1]; q.cf = p[2]; q.gamma = p[3]; q.s = p[4]; q.lag = p[5]
    q.relay = p[6]; q.vel = p[7]; q.mode = <int>p[8]; q.fr = p[9]
    q.rtol = p[10]; q.atol = p[11]; q.hmax = p[12]; q.hmin = p[13]
    q.radius = p[14]; q.wx1 = p[15]
    q.xeq = p[16]; q.rest = p[17]
    return q


cdef inline double _branch(double z) nogil:
    if z == 0.0:
        return 0.0
    return z * (1.0 - log(fabs(z)))


cdef inline void _forces(const double* y, const Par* q, double* u, double* f) nogil:
    cdef double relay = -q.gamma * q.relay
    u[0] = y[3] if q.lag > 0.0 else relay
    if q.mode == 2:
        f[0] = -q.k * y[0] + u[0]
    elif q.mode == 1:
        f[0] = q.cf * (fabs(q.vel - q.fr) * _branch(y[2]) + q.fr)
    else:
        f[0] = q.cf * q.vel


cdef inline void _rhs(const double* y, const Par* q, double* dy) nogil:
    cdef double relay = -q.gamma * q.relay
    cdef double u, f, x2
    dy[3] = (relay - y[3]) / q.lag if q.lag > 0.0 else 0.0
    if q.mode == 2:
        dy[0] = 0.0; dy[1] = 0.0; dy[2] = 0.0; dy[4] = 0.0; dy[5] = 0.0
        return
    _forces(y, q, &u, &f)
    x2 = y[1]
    dy[0] = x2
    dy[1] = -q.k * y[0] - q.c * x2 - f + u
    dy[2] = q.s * x2 if q.mode == 1 else 0.0
    dy[4] = f * x2
    dy[5] = u * x2


cdef double _dp(const double* y, double h, const Par* q, double* ynew) nogil:
    cdef double k1[NY_]
    cdef double k2[NY_]
    cdef double k3[NY_]
    cdef double k4[NY_]
    cdef double k5[NY_]
    cdef double k6[NY_]
    cdef double k7[NY_]
    cdef double tmp[NY_]
    cdef int i
    cdef double acc = 0.0, e, sc
    _rhs(y, q, k1)
    for i in range(NY_):
        tmp[i] = y[i] + h * A21 * k1[i]
    _rhs(tmp, q, k2)
    for i in range(NY_):
        tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i])
    _rhs(tmp, q, k3)
    for i in range(NY_):
        tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    _rhs(tmp, q, k4)
    for i in range(NY_):
        tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i])
    _rhs(tmp, q, k5)
    for i in range(NY_):
        tmp[i] = y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i])
    _rhs(tmp, q, k6)
    for i in range(NY_):
        ynew[i] = y[i] + h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B5 * k5[i] + B6 * k6[i])
    _rhs(ynew, q, k7)
    for i in range(NY_):
        e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
        sc = q.atol + q.rtol * max(fabs(y[i]), fabs(ynew[i]))
        acc += (e / sc) * (e / sc)
    return sqrt(acc / NY_)


cdef inline bint _crossed(const double* y, const Par* q) nogil:
    cdef double u
    if q.mode == 2:
        u = y[3] if q.lag > 0.0 else -q.gamma * q.relay
        return fabs(-q.k * y[0] + u) > q.cf
    if y[0] * q.relay <= 0.0 or y[1] * q.vel <= 0.0:
        return True
    if q.mode == 1 and fabs(y[2]) >= 1.0:
        return True
    if q.rest > 0.0 and hypot(sqrt(q.k) * (y[0] - q.xeq), y[1]) <= q.rest:
        return True
    return hypot(q.wx1 * y[0], y[1]) <= q.radius


def branch(double z):
    return _branch(z)


def forces(y, p):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Par q = _unpack(pv)
    cdef double u, f
    _forces(&yv[0], &q, &u, &f)
    return u, f


def rhs(y, p):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Par q = _unpack(pv)
    cdef double dy[NY_]
    _rhs(&yv[0], &q, dy)
    return [dy[i] for i in range(NY_)]


def step(y, double h, p):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Par q = _unpack(pv)
    out = np.empty(NY_)
    cdef double[::1] ov = out
    _dp(&yv[0], h, &q, &ov[0])
    return out


def crossed(y, p):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=float)
    cdef Par q = _unpack(pv)
    return bool(_crossed(&yv[0], &q))


def advance(y0, double t0, double t_stop, double h, p, Py_ssize_t max_steps):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=float)
    cdef Par q = _unpack(pv)
    ts_arr = np.empty(max_steps)
    ys_arr = np.empty((max_steps, NY_))
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] ys = ys_arr
    cdef double y[NY_]
    cdef double ynew[NY_]
    cdef double t = t0, err, fac
    cdef Py_ssize_t n = 0
    cdef int i, status = 0
    cdef bint last, finite
    cdef double[::1] y0v = np.ascontiguousarray(y0, dtype=float)
    for i in range(NY_):
        y[i] = y0v[i]
    h = min(h, q.hmax)
    with nogil:
        while True:
            if t >= t_stop:
                status = 0
                break
            if n >= max_steps:
                status = 2
                break
            last = False
            if t + h >= t_stop:
                h = t_stop - t
                last = True
            err = _dp(y, h, &q, ynew)
            finite = isfinite(err)
            for i in range(NY_):
                if not isfinite(ynew[i]):
                    finite = False
            if not finite:
                if h <= q.hmin:
                    status = 4
                    break
                h *= 0.25
                continue
            if err <= 1.0:
                t = t_stop if last else t + h
                for i in range(NY_):
                    y[i] = ynew[i]
                    ys[n, i] = ynew[i]
                ts[n] = t
                n += 1
                if err == 0.0:
                    fac = 5.0
                else:
                    fac = min(5.0, 0.9 * pow(err, -0.2))
                h = min(q.hmax, h * max(fac, 0.2))
                if _crossed(y, &q):
                    status = 1
                    break
            else:
                h *= max(0.2, 0.9 * pow(err, -0.2))
                if h < q.hmin:
                    status = 3
                    break
    return status, ts_arr[:n].copy(), ys_arr[:n].copy(), h
