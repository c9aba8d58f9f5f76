"""Nonisothermal catalyst-pellet response curves.

A first-order reaction in a sphere, temperature eliminated through the
linear closure T = 1 + beta*(1 - u), leaves one dimensionless concentration
profile equation

    u'' + (2/r) u' = Phi^2 * u * exp(gamma*beta*(1-u) / (1+beta*(1-u)))

with regularity at the center and u(1) = 1 at the surface.  The observable
is the effectiveness factor eta = 3 u'(1) / Phi^2.

Profiles are computed by shooting from the center.  In the rescaled radius
rho = Phi*r the equation loses its Phi dependence, every center value
u_c in (0,1) produces a strictly increasing profile that crosses 1 exactly
once, and the crossing location *is* the Thiele modulus matching that
center value.  Sweeping u_c therefore parameterizes the whole response
curve even where eta(Phi) folds back on itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import _ode_py, backend
from .errors import ConfigurationError, NumericError
from .odeint import Trajectory

__all__ = [
    "PelletParams",
    "ResponseCurve",
    "DelayPairSet",
    "reaction_rate",
    "isothermal_eta",
    "solve_profile",
    "profile_crossing",
    "trace_curve",
    "delay_pairs",
]

SERIES_START = 1e-6   # radius where the center series hands over to the solver
RHO_MAX = 60.0        # generous bound on the crossing location


@dataclass(frozen=True)
class PelletParams:
    phi: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not self.phi > 0:
            raise ConfigurationError("Thiele modulus must be positive")
        if not self.gamma > 0:
            raise ConfigurationError("activation parameter gamma must be positive")
        if self.beta < 0:
            raise ConfigurationError("heat parameter beta cannot be negative")


@dataclass(frozen=True)
class ResponseCurve:
    """Arclength-ordered (Phi, eta) curve with its continuation parameter.

    Never stored as a function of Phi: the interesting regimes are exactly
    the ones where that map is not invertible.  Arclength is accumulated in
    (log10 Phi, log10 eta).
    """

    phi: np.ndarray
    eta: np.ndarray
    arclength: np.ndarray
    u_center: np.ndarray
    beta: float
    gamma: float
    gaps: tuple = ()

    def __post_init__(self):
        for name in ("phi", "eta", "arclength", "u_center"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not (len(self.phi) == len(self.eta) == len(self.arclength)
                == len(self.u_center)):
            raise ConfigurationError("curve arrays must share one length")
        if np.any(self.eta <= 0):
            raise ConfigurationError("effectiveness factors must be positive")
        if np.any(np.diff(self.arclength) <= 0):
            raise ConfigurationError("arclength must increase strictly")

    def __len__(self) -> int:
        return len(self.phi)


@dataclass(frozen=True)
class DelayPairSet:
    """Outputs paired with their value a fixed log-grid offset later."""

    pairs: np.ndarray
    phi: np.ndarray
    offset_steps: int
    delta: float
    curve: ResponseCurve

    def __len__(self) -> int:
        return self.pairs.shape[0]


def reaction_rate(u, beta: float, gamma: float):
    """Concentration-temperature source term R(u) of the profile equation."""
    u = np.asarray(u, dtype=float)
    return u * np.exp(gamma * beta * (1.0 - u) / (1.0 + beta * (1.0 - u)))


def isothermal_eta(phi):
    """Closed-form effectiveness factor of the isothermal (beta = 0) sphere.

    eta = 3 (Phi coth Phi - 1) / Phi^2, with the even series below 1e-3
    where the direct form loses digits.
    """
    phi = np.asarray(phi, dtype=float)
    if np.any(phi <= 0):
        raise ConfigurationError("Thiele modulus must be positive")
    small = phi < 1e-3
    out = np.empty_like(phi)
    p = phi[~small]
    out[~small] = 3.0 * (p / np.tanh(p) - 1.0) / p ** 2
    ps = phi[small]
    out[small] = 1.0 - ps ** 2 / 15.0 + 2.0 * ps ** 4 / 315.0
    return out if out.ndim else float(out)


def _center_ic(u_c: float, coeff: float, beta: float, gamma: float, r0: float):
    # u ~ u_c + (coeff/6) R(u_c) r^2 near the center; coeff carries Phi^2
    # in physical radius and 1 in the rescaled one
    R = float(reaction_rate(u_c, beta, gamma))
    u0 = u_c + coeff / 6.0 * R * r0 ** 2
    v0 = coeff / 3.0 * R * r0
    return np.array([u0, v0])


def _pellet_field(coeff: float, beta: float, gamma: float):
    def f(r, y):
        return np.array([
            y[1],
            coeff * float(reaction_rate(y[0], beta, gamma)) - 2.0 * y[1] / r,
        ])
    return f


def _integrate_scaled(beta: float, gamma: float, t0: float, t1: float, y0,
                      rtol: float, atol: float, stop: bool = False):
    if backend.use_compiled():
        return backend.speedups().integrate_builtin(
            backend.KIND_PELLET_SCALED, np.array([beta, gamma]),
            t0, t1, np.asarray(y0, dtype=float), rtol, atol, False,
            _ode_py.MAX_STEPS_DEFAULT, 0 if stop else -1, 1.0)
    return _ode_py.rk45(_pellet_field(1.0, beta, gamma), t0, t1,
                        np.asarray(y0, dtype=float), rtol, atol,
                        stop_comp=0 if stop else None, stop_value=1.0)


def solve_profile(params: PelletParams, u_c: float, rtol: float = 1e-8,
                  atol: Optional[float] = None):
    """Shoot one profile in physical radius; returns (u(1), eta).

    The caller owns the surface condition: u(1) = 1 holds only when u_c is
    the matched center value, and the returned surface value is the signal
    a matcher needs.
    """
    if not 0 < u_c <= 1:
        raise ConfigurationError("center value must lie in (0, 1]")
    if atol is None:
        # keep the error norm anchored to the profile scale; deep-diffusion
        # profiles start many orders of magnitude below 1
        atol = max(u_c * 1e-8, 1e-300)
    phi2 = params.phi ** 2
    y0 = _center_ic(u_c, phi2, params.beta, params.gamma, SERIES_START)
    if backend.use_compiled():
        ts, ys, fs, _ = backend.speedups().integrate_builtin(
            backend.KIND_PELLET_RADIUS,
            np.array([phi2, params.beta, params.gamma]),
            SERIES_START, 1.0, y0, rtol, atol, False,
            _ode_py.MAX_STEPS_DEFAULT)
    else:
        ts, ys, fs, _ = _ode_py.rk45(
            _pellet_field(phi2, params.beta, params.gamma),
            SERIES_START, 1.0, y0, rtol, atol)
    u1, v1 = ys[-1]
    if not (np.isfinite(u1) and np.isfinite(v1)) or u1 <= 0:
        raise NumericError("pellet profile left its physical range",
                           u_surface=float(u1), u_center=u_c)
    return float(u1), float(3.0 * v1 / phi2)


def profile_crossing(beta: float, gamma: float, u_c: float,
                     rtol: float = 1e-8, atol: Optional[float] = None):
    """Matched (Phi, eta) for one center value via the rescaled radius.

    Integrates the Phi-free form until the increasing profile crosses 1;
    the crossing radius equals the Thiele modulus whose boundary-value
    problem this center value solves, and eta = 3 u'(rho*) / rho*.
    """
    if not 0 < u_c < 1:
        raise ConfigurationError("center value must lie in (0, 1) to cross 1")
    if atol is None:
        atol = max(u_c * 1e-8, 1e-300)
    y0 = _center_ic(u_c, 1.0, beta, gamma, SERIES_START)
    ts, ys, fs, crossed = _integrate_scaled(beta, gamma, SERIES_START,
                                            RHO_MAX, y0, rtol, atol,
                                            stop=True)
    if not crossed:
        raise NumericError("profile failed to reach the surface value",
                           u_center=u_c, u_final=float(ys[-1][0]))
    traj = Trajectory(ts=np.asarray(ts), ys=np.asarray(ys), fs=np.asarray(fs))
    lo, hi = traj.ts[-2], traj.ts[-1]
    rho = brentq(lambda r: traj(r)[0] - 1.0, lo, hi, xtol=1e-13, rtol=8.9e-16)
    # the interpolant between accepted steps is only cubic, and the final
    # step can span most of a short run; polish the crossing by Newton steps
    # on re-integrations from the last knot before it
    base_t = float(traj.ts[-2])
    base_y = traj.ys[-2].copy()
    u = v = None
    for _ in range(3):
        _, ys2, _, _ = _integrate_scaled(beta, gamma, base_t, rho, base_y,
                                         rtol, atol)
        u, v = ys2[-1]
        if v <= 0 or not np.isfinite(u):
            raise NumericError("crossing refinement left the monotone regime",
                               u_center=u_c)
        correction = (u - 1.0) / v
        rho -= correction
        if abs(correction) < 1e-12 * rho:
            break
    return float(rho), float(3.0 * v / rho)


def trace_curve(beta: float, gamma: float, phi_grid, *,
                sweep_points: int = 400, u_c_bounds=(0.999, 1e-9),
                rtol: float = 1e-8) -> ResponseCurve:
    """Response curve over a Phi grid by continuation in the center value.

    The center value is swept monotonically; every (Phi(u_c), eta(u_c))
    pair lands on the curve by construction.  Each grid Phi is then matched
    exactly by root-finding in log u_c inside every sweep interval whose
    Phi values bracket it, which collects all branches of a folded curve.
    Unmatched grid values are reported in ``gaps``.
    """
    phi_grid = np.sort(np.asarray(phi_grid, dtype=float))
    if phi_grid.size == 0 or phi_grid[0] <= 0:
        raise ConfigurationError("Phi grid must be positive and non-empty")
    hi, lo = u_c_bounds
    if not (0 < lo < hi < 1):
        raise ConfigurationError("center-value bounds must satisfy 0 < lo < hi < 1")
    sweep_uc = list(np.exp(np.linspace(math.log(hi), math.log(lo), sweep_points)))
    sweep_phi = [profile_crossing(beta, gamma, uc, rtol=rtol)[0]
                 for uc in sweep_uc]
    # the grid may extend past what the requested bounds reach; continue the
    # geometric sweep at either end until it brackets every target
    step = math.log(sweep_uc[0] / sweep_uc[1])
    while max(sweep_phi) < phi_grid[-1] and sweep_uc[-1] > 1e-200:
        uc = sweep_uc[-1] * math.exp(-step)
        sweep_uc.append(uc)
        sweep_phi.append(profile_crossing(beta, gamma, uc, rtol=rtol)[0])
    while sweep_phi[0] > phi_grid[0] and sweep_uc[0] < 1 - 1e-7:
        uc = min(sweep_uc[0] * math.exp(step), 1 - 1e-7)
        sweep_uc.insert(0, uc)
        sweep_phi.insert(0, profile_crossing(beta, gamma, uc, rtol=rtol)[0])
    sweep_uc = np.asarray(sweep_uc)
    sweep_phi = np.asarray(sweep_phi)

    def phi_at(log_uc: float) -> float:
        return profile_crossing(beta, gamma, math.exp(log_uc), rtol=rtol)[0]

    found = {}       # u_c -> (phi_target, eta)
    matched = set()
    for j in range(len(sweep_uc) - 1):
        a, b = sweep_phi[j], sweep_phi[j + 1]
        plo, phi_ = min(a, b), max(a, b)
        for target in phi_grid[(phi_grid >= plo) & (phi_grid <= phi_)]:
            la, lb = math.log(sweep_uc[j]), math.log(sweep_uc[j + 1])
            fa, fb = a - target, b - target
            if fa == 0.0:
                root = la
            elif fb == 0.0:
                root = lb
            elif fa * fb < 0:
                root = brentq(lambda x: phi_at(x) - target, la, lb,
                              xtol=1e-12, rtol=8.9e-16)
            else:
                continue
            uc_root = math.exp(root)
            key = round(root, 9)
            if key not in found:
                p_star, eta_star = profile_crossing(beta, gamma, uc_root,
                                                    rtol=rtol)
                found[key] = (uc_root, float(target), eta_star)
            matched.add(float(target))
    gaps = tuple(float(t) for t in phi_grid if float(t) not in matched)
    if not found:
        raise NumericError("no grid value was reachable from the sweep",
                           phi_lo=float(sweep_phi.min()),
                           phi_hi=float(sweep_phi.max()))
    rows = sorted(found.values(), key=lambda r: -r[0])  # descending u_c
    u_center = np.array([r[0] for r in rows])
    phi = np.array([r[1] for r in rows])
    eta = np.array([r[2] for r in rows])
    steps = np.hypot(np.diff(np.log10(phi)), np.diff(np.log10(eta)))
    arclength = np.concatenate([[0.0], np.cumsum(np.maximum(steps, 1e-300))])
    return ResponseCurve(phi=phi, eta=eta, arclength=arclength,
                         u_center=u_center, beta=beta, gamma=gamma, gaps=gaps)


def delay_pairs(curve: ResponseCurve, offset_steps: Optional[int] = None,
                delta: Optional[float] = None) -> DelayPairSet:
    """Pair each output with the one a fixed offset later in log10 Phi.

    The curve must sit on a regular log grid (one point per grid value);
    the offset may be given in whole grid steps or as a log10 increment
    that is a whole multiple of the grid step.
    """
    logphi = np.log10(curve.phi)
    diffs = np.diff(logphi)
    if len(curve) < 2 or np.any(diffs <= 0):
        raise ConfigurationError(
            "delay pairing needs a single-branch curve on an increasing grid")
    step = float(np.median(diffs))
    if np.abs(diffs - step).max() > 1e-6 * step:
        raise ConfigurationError("grid is not regular in log10 Phi")
    if (offset_steps is None) == (delta is None):
        raise ConfigurationError("give exactly one of offset_steps or delta")
    if offset_steps is None:
        ratio = delta / step
        offset_steps = int(round(ratio))
        if abs(ratio - offset_steps) > 1e-6:
            raise ConfigurationError(
                f"offset {delta} is not a whole number of grid steps ({step})")
    if offset_steps < 0 or offset_steps >= len(curve):
        raise ConfigurationError("offset must lie within the grid")
    n = len(curve) - offset_steps
    pairs = np.column_stack([curve.eta[:n],
                             curve.eta[offset_steps:offset_steps + n]])
    return DelayPairSet(pairs=pairs, phi=curve.phi[:n].copy(),
                        offset_steps=offset_steps,
                        delta=offset_steps * step, curve=curve)
