"""Adaptive initial-value integration with dense output.

Public surface:

* :func:`integrate_ivp` integrates ``y' = field(t, y)`` over a span with an
  explicit embedded RK 5(4) scheme (nonstiff) or the L-stable TR-BDF2 scheme
  (stiff) and returns a :class:`Trajectory`.
* :class:`Trajectory` interpolates between accepted steps with a cubic
  Hermite polynomial built from the stored states and derivatives.

Models with compiled right-hand sides route their inner loops through
``effparam.backend`` instead; this module is the generic path for arbitrary
Python callables and the reference implementation the compiled core must
agree with.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _ode_py
from .errors import ConfigurationError, NumericError

__all__ = ["Trajectory", "integrate_ivp", "NumericError"]

DEFAULT_RTOL = 1e-8
DEFAULT_ATOL = 1e-10


@dataclass(frozen=True)
class Trajectory:
    """Accepted integration knots plus cubic-Hermite dense output.

    Attributes
    ----------
    ts : (K,) float array, strictly increasing accepted times
    ys : (K, n) states at the accepted times
    fs : (K, n) field values at the accepted times
    """

    ts: np.ndarray
    ys: np.ndarray
    fs: np.ndarray

    @property
    def t0(self) -> float:
        return float(self.ts[0])

    @property
    def t1(self) -> float:
        return float(self.ts[-1])

    def __call__(self, t):
        """Evaluate the interpolant at scalar or array ``t`` inside the span."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(t_arr < self.ts[0] - 1e-12) or np.any(t_arr > self.ts[-1] + 1e-12):
            raise ConfigurationError(
                f"evaluation time outside integration span [{self.t0}, {self.t1}]"
            )
        idx = np.clip(np.searchsorted(self.ts, t_arr, side="right") - 1, 0, len(self.ts) - 2)
        t_lo = self.ts[idx]
        h = self.ts[idx + 1] - t_lo
        s = np.where(h > 0, (t_arr - t_lo) / h, 0.0)[:, None]
        y0, y1 = self.ys[idx], self.ys[idx + 1]
        f0, f1 = self.fs[idx], self.fs[idx + 1]
        h = h[:, None]
        h00 = (1 + 2 * s) * (1 - s) ** 2
        h10 = s * (1 - s) ** 2
        h01 = s * s * (3 - 2 * s)
        h11 = s * s * (s - 1)
        out = h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1
        if np.isscalar(t) or np.asarray(t).ndim == 0:
            return out[0]
        return out


def integrate_ivp(
    field,
    t_span,
    y0,
    *,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    stiff: bool = False,
    jac=None,
    max_steps: int = _ode_py.MAX_STEPS_DEFAULT,
) -> Trajectory:
    """Integrate an initial-value problem and return its :class:`Trajectory`.

    Parameters
    ----------
    field : callable ``(t, y) -> dy/dt``
    t_span : (t0, t1) with t1 > t0
    y0 : initial state, shape (n,)
    stiff : select the implicit TR-BDF2 scheme instead of explicit RK 5(4)
    jac : optional callable ``(t, y) -> (n, n)`` Jacobian for the stiff path;
        a finite-difference Jacobian is used when omitted

    Raises
    ------
    ConfigurationError
        for an empty or reversed span or non-finite initial state.
    NumericError
        on step-size underflow or step-budget exhaustion; the error carries
        the last accepted state in its diagnostics.
    """
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not t1 > t0:
        raise ConfigurationError(f"integration span must be increasing, got ({t0}, {t1})")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not np.all(np.isfinite(y0)):
        raise ConfigurationError("initial state contains non-finite entries")
    if rtol <= 0 or atol <= 0:
        raise ConfigurationError("tolerances must be positive")
    if stiff:
        ts, ys, fs, _ = _ode_py.trbdf2(field, jac, t0, t1, y0, rtol, atol, max_steps)
    else:
        ts, ys, fs, _ = _ode_py.rk45(field, t0, t1, y0, rtol, atol, max_steps)
    return Trajectory(ts=ts, ys=ys, fs=fs)
