"""Pure-Python adaptive integrators.

Two schemes, matching the compiled core in ``_speedups``:

* an explicit embedded Runge-Kutta 5(4) pair (Dormand-Prince coefficients)
  for nonstiff problems, and
* the L-stable one-step TR-BDF2 scheme (trapezoidal stage followed by a
  BDF2 stage, gamma = 2 - sqrt(2)) with a Newton solve per stage and an
  embedded third-order error estimate, for stiff problems.

Both return the accepted knots ``(ts, ys, fs)`` so a caller can build a
cubic-Hermite dense output.  Step acceptance uses a weighted RMS error norm
against ``atol + rtol * |y|``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import NumericError

# Dormand-Prince 5(4) tableau.
_DP_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_DP_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
# 5th-order solution weights: last A row plus a zero for the FSAL stage.
_DP_B5 = np.append(_DP_A[6], 0.0)
_DP_B4 = np.array(
    [5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40]
)

_TR_GAMMA = 2.0 - math.sqrt(2.0)

MAX_STEPS_DEFAULT = 100_000


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return math.sqrt(float(np.mean((err / scale) ** 2)))


def _initial_step(f, t0, y0, f0, t1, rtol, atol):
    # Hairer-style cheap heuristic, clipped to the span.
    span = abs(t1 - t0)
    scale = atol + rtol * np.abs(y0)
    d0 = math.sqrt(float(np.mean((y0 / scale) ** 2)))
    d1 = math.sqrt(float(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 * span if (d0 < 1e-5 or d1 < 1e-5) else 0.01 * d0 / d1
    h0 = min(h0, 0.1 * span)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = math.sqrt(float(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6 * span, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def rk45(f, t0, t1, y0, rtol, atol, max_steps=MAX_STEPS_DEFAULT,
         stop_comp=None, stop_value=0.0):
    """Integrate ``y' = f(t, y)`` from t0 to t1 (t1 > t0).

    Returns ``(ts, ys, fs, crossed)``.  When ``stop_comp`` is given, stepping
    halts after the first accepted step with ``y[stop_comp] >= stop_value``
    and ``crossed`` reports whether that happened before t1.
    """
    y = np.array(y0, dtype=float)
    n = y.size
    t = float(t0)
    fcur = np.asarray(f(t, y), dtype=float)
    h = _initial_step(f, t, y, fcur, t1, rtol, atol)
    ts, ys, fs = [t], [y.copy()], [fcur.copy()]
    k = np.empty((7, n))
    nsteps = 0
    crossed = False
    hmin = 1e-14 * abs(t1 - t0)
    while t < t1 and not crossed:
        if nsteps >= max_steps:
            raise NumericError("step budget exhausted", t=t, y=y.tolist())
        if h < hmin:
            raise NumericError("step size underflow", t=t, y=y.tolist())
        h = min(h, t1 - t)
        k[0] = fcur
        for i in range(1, 7):
            yi = y + h * (_DP_A[i] @ k[:i])
            k[i] = f(t + _DP_C[i] * h, yi)
        y5 = y + h * (_DP_B5 @ k[:7])
        err = h * ((_DP_B5 - _DP_B4) @ k[:7])
        enorm = _error_norm(err, y, y5, rtol, atol)
        if enorm <= 1.0 or h <= hmin * 2.0:
            t += h
            y = y5
            fcur = k[6].copy()  # FSAL: last stage is f at the new point
            ts.append(t)
            ys.append(y.copy())
            fs.append(fcur.copy())
            if stop_comp is not None and y[stop_comp] >= stop_value:
                crossed = True
        factor = 0.9 * enorm ** -0.2 if enorm > 0 else 5.0
        h *= min(5.0, max(0.2, factor))
        nsteps += 1
    return np.array(ts), np.array(ys), np.array(fs), crossed


def _fd_jacobian(f, t, y, fy):
    n = y.size
    J = np.empty((n, n))
    for j in range(n):
        dy = 1e-8 * max(abs(y[j]), 1.0)
        yp = y.copy()
        yp[j] += dy
        J[:, j] = (np.asarray(f(t, yp)) - fy) / dy
    return J


def _newton_stage(f, jac, t_stage, y_guess, rhs_const, coeff, rtol, atol):
    """Solve y = rhs_const + coeff * f(t_stage, y) by damped Newton.

    Returns (y, f(t_stage, y), converged).
    """
    y = y_guess.copy()
    fy = np.asarray(f(t_stage, y), dtype=float)
    tol = 0.1 * atol + 0.1 * rtol * float(np.max(np.abs(y))) if y.size else atol
    I = np.eye(y.size)
    J = jac(t_stage, y) if jac is not None else _fd_jacobian(f, t_stage, y, fy)
    A = I - coeff * J
    for _ in range(12):
        resid = y - rhs_const - coeff * fy
        try:
            delta = np.linalg.solve(A, resid)
        except np.linalg.LinAlgError:
            return y, fy, False
        y = y - delta
        fy = np.asarray(f(t_stage, y), dtype=float)
        if not np.all(np.isfinite(fy)):
            return y, fy, False
        if float(np.max(np.abs(delta))) <= tol + 1e-14 * float(np.max(np.abs(y))):
            return y, fy, True
    return y, fy, False


def trbdf2(f, jac, t0, t1, y0, rtol, atol, max_steps=MAX_STEPS_DEFAULT,
           stop_comp=None, stop_value=0.0):
    """L-stable TR-BDF2 integration of ``y' = f(t, y)``.

    Returns ``(ts, ys, fs, crossed)`` like :func:`rk45`.  ``jac(t, y)`` may be
    None, in which case a forward-difference Jacobian is used for the Newton
    iterations.
    """
    g = _TR_GAMMA
    y = np.array(y0, dtype=float)
    t = float(t0)
    fcur = np.asarray(f(t, y), dtype=float)
    h = min(_initial_step(f, t, y, fcur, t1, rtol, atol), 0.01 * abs(t1 - t0))
    ts, ys, fs = [t], [y.copy()], [fcur.copy()]
    nsteps = 0
    crossed = False
    hmin = 1e-14 * abs(t1 - t0)
    # error-estimate constant (third-order embedded difference)
    cerr = (-3 * g * g + 4 * g - 2) / (12 * (2 - g))
    while t < t1 and not crossed:
        if nsteps >= max_steps:
            raise NumericError("step budget exhausted", t=t, y=y.tolist())
        if h < hmin:
            raise NumericError("step size underflow", t=t, y=y.tolist())
        h = min(h, t1 - t)
        nsteps += 1
        # TR stage to t + g*h
        coeff = 0.5 * g * h
        rhs = y + coeff * fcur
        yg, fg, ok = _newton_stage(f, jac, t + g * h, y, rhs, coeff, rtol, atol)
        if not ok:
            h *= 0.25
            continue
        # BDF2 stage to t + h
        w = (1 - g) / (2 - g)
        rhs = (y * (-((1 - g) ** 2)) + yg) / (g * (2 - g))
        ynew, fnew, ok = _newton_stage(f, jac, t + h, yg, rhs, w * h, rtol, atol)
        if not ok:
            h *= 0.25
            continue
        est = cerr * h * (fcur / g - fg / (g * (1 - g)) + fnew / (1 - g))
        enorm = _error_norm(est, y, ynew, rtol, atol)
        if enorm <= 1.0 or h <= hmin * 2.0:
            t += h
            y = ynew
            fcur = fnew
            ts.append(t)
            ys.append(y.copy())
            fs.append(fcur.copy())
            if stop_comp is not None and y[stop_comp] >= stop_value:
                crossed = True
        factor = 0.9 * enorm ** (-1 / 3) if enorm > 0 else 2.0
        h *= min(2.0, max(0.2, factor))
    return np.array(ts), np.array(ys), np.array(fs), crossed
