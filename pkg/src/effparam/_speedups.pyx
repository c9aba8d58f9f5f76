# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled integrator core.

Implements the same embedded RK 5(4) and TR-BDF2 schemes as ``_ode_py`` with
right-hand sides compiled in, for the per-sample inner loops that dominate
runtime (stiff kinetics trajectories, catalyst-profile shots).  State
dimension is fixed at 2 for every built-in field.

Field kinds:
  1  rescaled two-species enzyme kinetics; params (eps, sigma, kappa)
  2  catalyst pellet profile in the physical radius; params (phi2, beta, gamma)
  3  catalyst pellet profile in the scaled radius (unit reaction coefficient);
     params (beta, gamma)
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, fabs, fmax, fmin, sqrt

cnp.import_array()

DEF NDIM = 2

cdef double _G = 2.0 - 1.4142135623730951  # TR-BDF2 gamma

# Dormand-Prince 5(4) tableau
cdef double[7] _C = [0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0]
cdef double[7][6] _A = [
    [0, 0, 0, 0, 0, 0],
    [1.0 / 5, 0, 0, 0, 0, 0],
    [3.0 / 40, 9.0 / 40, 0, 0, 0, 0],
    [44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0],
    [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0],
    [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0],
    [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84],
]
cdef double[7] _B5 = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
cdef double[7] _B4 = [5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40]


cdef inline double _rate_boost(double u, double beta, double gamma) nogil:
    # Arrhenius factor of the nonisothermal first-order rate, u in (0, 1+1/beta)
    return exp(gamma * beta * (1.0 - u) / (1.0 + beta * (1.0 - u)))


cdef inline void _rhs(int kind, double t, double* y, double* pars, double* out) nogil:
    cdef double eps, sig, kap, bracket, phi2, beta, gamma
    if kind == 1:
        eps = pars[0]; sig = pars[1]; kap = pars[2]
        bracket = (1.0 + sig) * y[0] - sig * y[1] * y[0]
        out[0] = -(kap + 1.0) * bracket + kap * y[1]
        out[1] = (kap + 1.0) * (bracket - y[1]) / eps
    elif kind == 2:
        phi2 = pars[0]; beta = pars[1]; gamma = pars[2]
        out[0] = y[1]
        out[1] = -2.0 * y[1] / t + phi2 * y[0] * _rate_boost(y[0], beta, gamma)
    else:
        beta = pars[0]; gamma = pars[1]
        out[0] = y[1]
        out[1] = -2.0 * y[1] / t + y[0] * _rate_boost(y[0], beta, gamma)


cdef inline void _jac(int kind, double t, double* y, double* pars, double* J) nogil:
    # row-major 2x2
    cdef double eps, sig, kap, phi2, beta, gamma, boost, dedu
    if kind == 1:
        eps = pars[0]; sig = pars[1]; kap = pars[2]
        J[0] = -(kap + 1.0) * ((1.0 + sig) - sig * y[1])
        J[1] = (kap + 1.0) * sig * y[0] + kap
        J[2] = (kap + 1.0) * ((1.0 + sig) - sig * y[1]) / eps
        J[3] = (kap + 1.0) * (-sig * y[0] - 1.0) / eps
    else:
        if kind == 2:
            phi2 = pars[0]; beta = pars[1]; gamma = pars[2]
        else:
            phi2 = 1.0; beta = pars[0]; gamma = pars[1]
        boost = _rate_boost(y[0], beta, gamma)
        dedu = -gamma * beta / ((1.0 + beta * (1.0 - y[0])) ** 2)
        J[0] = 0.0
        J[1] = 1.0
        J[2] = phi2 * boost * (1.0 + y[0] * dedu)
        J[3] = -2.0 / t


cdef inline double _err_norm(double* err, double* yo, double* yn, double rtol, double atol) nogil:
    cdef double acc = 0.0, sc
    cdef int i
    for i in range(NDIM):
        sc = atol + rtol * fmax(fabs(yo[i]), fabs(yn[i]))
        acc += (err[i] / sc) * (err[i] / sc)
    return sqrt(acc / NDIM)


cdef double _initial_step(int kind, double* pars, double t0, double* y0, double* f0,
                          double t1, double rtol, double atol) nogil:
    cdef double span = fabs(t1 - t0)
    cdef double d0 = 0.0, d1 = 0.0, d2 = 0.0, sc, h0, h1
    cdef double[NDIM] y1
    cdef double[NDIM] f1
    cdef int i
    for i in range(NDIM):
        sc = atol + rtol * fabs(y0[i])
        d0 += (y0[i] / sc) * (y0[i] / sc)
        d1 += (f0[i] / sc) * (f0[i] / sc)
    d0 = sqrt(d0 / NDIM); d1 = sqrt(d1 / NDIM)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6 * span
    else:
        h0 = 0.01 * d0 / d1
    h0 = fmin(h0, 0.1 * span)
    for i in range(NDIM):
        y1[i] = y0[i] + h0 * f0[i]
    _rhs(kind, t0 + h0, y1, pars, f1)
    for i in range(NDIM):
        sc = atol + rtol * fabs(y0[i])
        d2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc)
    d2 = sqrt(d2 / NDIM) / h0
    if fmax(d1, d2) <= 1e-15:
        h1 = fmax(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / fmax(d1, d2)) ** 0.2
    return fmin(fmin(100.0 * h0, h1), span)


cdef int _newton_stage(int kind, double* pars, double t_stage, double* y, double* fy,
                       double* rhs_const, double coeff, double rtol, double atol) nogil:
    """Solve y = rhs_const + coeff*f(t_stage, y) in place; returns 1 on success."""
    cdef double[4] J
    cdef double a11, a12, a21, a22, det, r1, r2, d1, d2, tol, ymax
    cdef int it, i
    _rhs(kind, t_stage, y, pars, fy)
    _jac(kind, t_stage, y, pars, J)
    a11 = 1.0 - coeff * J[0]; a12 = -coeff * J[1]
    a21 = -coeff * J[2]; a22 = 1.0 - coeff * J[3]
    det = a11 * a22 - a12 * a21
    if det == 0.0 or det != det:
        return 0
    ymax = fmax(fabs(y[0]), fabs(y[1]))
    tol = 0.1 * atol + 0.1 * rtol * ymax
    for it in range(12):
        r1 = y[0] - rhs_const[0] - coeff * fy[0]
        r2 = y[1] - rhs_const[1] - coeff * fy[1]
        d1 = (r1 * a22 - r2 * a12) / det
        d2 = (a11 * r2 - a21 * r1) / det
        y[0] -= d1
        y[1] -= d2
        _rhs(kind, t_stage, y, pars, fy)
        if fy[0] != fy[0] or fy[1] != fy[1]:
            return 0
        ymax = fmax(fabs(y[0]), fabs(y[1]))
        if fmax(fabs(d1), fabs(d2)) <= tol + 1e-14 * ymax:
            return 1
    return 0


def integrate_builtin(int kind, pars_in, double t0, double t1, y0_in,
                      double rtol, double atol, bint stiff, int max_steps,
                      int stop_comp=-1, double stop_value=0.0):
    """Integrate a built-in field. Returns (ts, ys, fs, crossed).

    When ``stop_comp`` is >= 0, stepping halts after the first accepted step
    with ``y[stop_comp] >= stop_value``; ``crossed`` reports whether that
    happened.  Raises RuntimeError on step failure (mirrors the pure path).
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=1] pars = np.ascontiguousarray(pars_in, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] yini = np.ascontiguousarray(y0_in, dtype=np.float64)
    if yini.shape[0] != NDIM:
        raise ValueError("built-in fields have state dimension 2")

    cdef Py_ssize_t cap = 512, k = 0
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ts = np.empty(cap)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ys = np.empty((cap, NDIM))
    cdef cnp.ndarray[cnp.float64_t, ndim=2] fs = np.empty((cap, NDIM))

    cdef double[NDIM] y
    cdef double[NDIM] fcur
    cdef double[NDIM] ytmp
    cdef double[NDIM] ynew
    cdef double[NDIM] fnew
    cdef double[NDIM] yg
    cdef double[NDIM] fg
    cdef double[NDIM] err
    cdef double[NDIM] rhs_c
    cdef double[7][NDIM] kst
    cdef double* ppars = &pars[0]
    cdef double t = t0, h, enorm, factor, acc, w, cerr, hmin, cap_f
    cdef int i, j, st, nsteps = 0
    cdef bint crossed = False, ok

    for i in range(NDIM):
        y[i] = yini[i]
    _rhs(kind, t, y, ppars, fcur)
    h = _initial_step(kind, ppars, t, y, fcur, t1, rtol, atol)
    if stiff:
        h = fmin(h, 0.01 * fabs(t1 - t0))
    hmin = 1e-14 * fabs(t1 - t0)
    cerr = (-3.0 * _G * _G + 4.0 * _G - 2.0) / (12.0 * (2.0 - _G))
    w = (1.0 - _G) / (2.0 - _G)

    ts[0] = t
    for i in range(NDIM):
        ys[0, i] = y[i]
        fs[0, i] = fcur[i]
    k = 1

    while t < t1 and not crossed:
        if nsteps >= max_steps:
            raise RuntimeError("step budget exhausted at t=%r" % t)
        if h < hmin:
            raise RuntimeError("step size underflow at t=%r" % t)
        if h > t1 - t:
            h = t1 - t
        nsteps += 1

        if not stiff:
            for i in range(NDIM):
                kst[0][i] = fcur[i]
            for st in range(1, 7):
                for i in range(NDIM):
                    acc = 0.0
                    for j in range(st):
                        acc += _A[st][j] * kst[j][i]
                    ytmp[i] = y[i] + h * acc
                _rhs(kind, t + _C[st] * h, ytmp, ppars, kst[st])
            for i in range(NDIM):
                acc = 0.0
                for j in range(7):
                    acc += _B5[j] * kst[j][i]
                ynew[i] = y[i] + h * acc
                acc = 0.0
                for j in range(7):
                    acc += (_B5[j] - _B4[j]) * kst[j][i]
                err[i] = h * acc
            for i in range(NDIM):
                fnew[i] = kst[6][i]
            enorm = _err_norm(err, y, ynew, rtol, atol)
            ok = True
        else:
            for i in range(NDIM):
                yg[i] = y[i]
                rhs_c[i] = y[i] + 0.5 * _G * h * fcur[i]
            ok = _newton_stage(kind, ppars, t + _G * h, yg, fg, rhs_c, 0.5 * _G * h, rtol, atol)
            if ok:
                for i in range(NDIM):
                    ynew[i] = yg[i]
                    rhs_c[i] = (y[i] * (-((1.0 - _G) ** 2)) + yg[i]) / (_G * (2.0 - _G))
                ok = _newton_stage(kind, ppars, t + h, ynew, fnew, rhs_c, w * h, rtol, atol)
            if ok:
                for i in range(NDIM):
                    err[i] = cerr * h * (fcur[i] / _G - fg[i] / (_G * (1.0 - _G)) + fnew[i] / (1.0 - _G))
                enorm = _err_norm(err, y, ynew, rtol, atol)
            else:
                h *= 0.25
                continue

        if enorm <= 1.0 or h <= hmin * 2.0:
            t += h
            for i in range(NDIM):
                y[i] = ynew[i]
                fcur[i] = fnew[i]
            if k >= cap:
                cap *= 2
                ts = np.resize(ts, cap)
                ys = np.resize(ys, (cap, NDIM))
                fs = np.resize(fs, (cap, NDIM))
            ts[k] = t
            for i in range(NDIM):
                ys[k, i] = y[i]
                fs[k, i] = fcur[i]
            k += 1
            if stop_comp >= 0 and y[stop_comp] >= stop_value:
                crossed = True
        if enorm > 0.0:
            factor = 0.9 * enorm ** (-0.2 if not stiff else -1.0 / 3.0)
        else:
            factor = 5.0 if not stiff else 2.0
        cap_f = 5.0 if not stiff else 2.0
        h *= fmin(cap_f, fmax(0.2, factor))

    return ts[:k].copy(), ys[:k].copy(), fs[:k].copy(), bool(crossed)


def ping():
    return "compiled"
