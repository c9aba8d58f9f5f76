"""Model zoo: input-output maps with known effective-parameter structure.

Every model follows one convention: ``evaluate(inputs, protocol)`` takes an
(L, M) array of input-parameter rows plus an observation protocol (monitored
variable, monitoring times, fixed initial conditions) and returns an (L, N)
output array.  Rows whose evaluation fails (finite-time blow-up, divergent
observation transform, integrator failure) come back as NaN so that callers
can record and drop them.

The zoo:

* ``toy``       three closed-form functions of the product p1*p2
* ``singpert``  linear fast-slow relaxation, exact two-mode solution
* ``regpert``   weakly nonlinear decay with an exact solution
* ``abc``       three-species reaction chain A <-> B -> C, exact solution
* ``mmh``       rescaled two-species enzyme kinetics, integrated on demand
* ``henon``     exponential latents observed through a coupled quadratic
                transformation, with inputs given in pushed-forward
                coordinates (two iterations of a quadratic recurrence map)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _ode_py, backend
from .errors import ConfigurationError, NumericError
from .odeint import Trajectory, integrate_ivp

__all__ = [
    "ObservationProtocol",
    "ModelDefinition",
    "MODELS",
    "get_model",
    "toy_response",
    "toy_jacobian",
    "singpert_response",
    "singpert_jacobian",
    "regpert_response",
    "abc_response",
    "AbcEffective",
    "abc_effective",
    "MmhParameters",
    "mmh_from_dimensional",
    "mmh_from_rescaled",
    "mmh_response",
    "mmh_reduced_response",
    "henon_parameter_map",
    "henon_parameter_map_inverse",
    "henon_response",
    "observation_fixed_point",
]

STIFFNESS_SWITCH = 0.05  # mmh: integrate implicitly below this eps


@dataclass(frozen=True)
class ObservationProtocol:
    """What is monitored, when, and which initial data are held fixed.

    Fixed initial conditions are part of the experiment, not inputs: they
    never appear in sampled parameter vectors.
    """

    variable: str
    times: tuple = ()
    fixed: dict = field(default_factory=dict)

    def __post_init__(self):
        ts = tuple(float(t) for t in self.times)
        if any(t2 <= t1 for t1, t2 in zip(ts, ts[1:])):
            raise ConfigurationError("monitoring times must be strictly increasing")
        object.__setattr__(self, "times", ts)


@dataclass(frozen=True)
class ModelDefinition:
    """Registry entry tying a model id to its evaluator and metadata."""

    model_id: str
    input_names: tuple
    admissible_ranges: tuple
    solver_kind: str  # "closed-form" | "nonstiff" | "stiff-switch"
    default_protocol: ObservationProtocol
    evaluate: Callable
    jacobian: Optional[Callable] = None

    @property
    def input_dim(self) -> int:
        return len(self.input_names)


def _as_batch(inputs, dim, name):
    arr = np.atleast_2d(np.asarray(inputs, dtype=float))
    if arr.shape[1] != dim:
        raise ConfigurationError(
            f"{name} expects {dim} input columns, got shape {arr.shape}"
        )
    return arr


# ---------------------------------------------------------------------------
# toy: three functions of the product q = p1*p2
# ---------------------------------------------------------------------------

def toy_response(inputs, protocol=None, eps_pert: float = 0.0) -> np.ndarray:
    """Evaluate (q + 2*eps_pert*(p1-p2), ln q, q^2) with q = p1*p2.

    ``eps_pert`` perturbs only the first component; at 0 the output depends
    on the inputs exclusively through q.
    """
    p = _as_batch(inputs, 2, "toy")
    q = p[:, 0] * p[:, 1]
    if np.any(q <= 0):
        raise ConfigurationError("toy model requires p1*p2 > 0")
    out = np.column_stack([q + 2.0 * eps_pert * (p[:, 0] - p[:, 1]), np.log(q), q * q])
    return out


def toy_jacobian(p, protocol=None, eps_pert: float = 0.0) -> np.ndarray:
    p1, p2 = float(p[0]), float(p[1])
    if p1 * p2 <= 0:
        raise ConfigurationError("toy model requires p1*p2 > 0")
    return np.array(
        [
            [p2 + 2.0 * eps_pert, p1 - 2.0 * eps_pert],
            [1.0 / p1, 1.0 / p2],
            [2.0 * p1 * p2 * p2, 2.0 * p2 * p1 * p1],
        ]
    )


# ---------------------------------------------------------------------------
# singpert: dx/dt = 2 - x - y, eps*dy/dt = x - y, exact two-mode solution
# ---------------------------------------------------------------------------

def _singpert_modes(eps):
    """Complex eigenpair quantities for the linear fast-slow system."""
    u = 1.0 / eps
    disc = (1.0 + u) ** 2 - 8.0 * u
    sq = np.sqrt(disc.astype(complex))
    lam_p = 0.5 * (-(1.0 + u) + sq)
    lam_m = 0.5 * (-(1.0 + u) - sq)
    return u, lam_p, lam_m


def singpert_response(inputs, protocol=None) -> np.ndarray:
    """Monitored y(t) of the fast-slow pair from the exact solution.

    inputs columns: (eps, y0).  x0 and the times come from the protocol.
    """
    protocol = protocol or SINGPERT_PROTOCOL
    p = _as_batch(inputs, 2, "singpert")
    eps, y0 = p[:, 0], p[:, 1]
    if np.any(eps <= 0):
        raise ConfigurationError("singpert requires eps > 0")
    x0 = float(protocol.fixed.get("x0", -1.0))
    times = np.asarray(protocol.times, dtype=float)
    _, lam_p, lam_m = _singpert_modes(eps)
    z0x = x0 - 1.0
    z0y = y0 - 1.0
    c_p = (z0y + (1.0 + lam_m) * z0x) / (lam_m - lam_p)
    c_m = z0x - c_p
    e_p = np.exp(lam_p[:, None] * times[None, :])
    e_m = np.exp(lam_m[:, None] * times[None, :])
    y = 1.0 - (1.0 + lam_p)[:, None] * c_p[:, None] * e_p \
        - (1.0 + lam_m)[:, None] * c_m[:, None] * e_m
    return np.real(y)


def singpert_jacobian(p, protocol=None) -> np.ndarray:
    """Closed-form d y(t) / d (eps, y0), differentiated through the modes."""
    protocol = protocol or SINGPERT_PROTOCOL
    eps, y0 = float(p[0]), float(p[1])
    if eps <= 0:
        raise ConfigurationError("singpert requires eps > 0")
    x0 = float(protocol.fixed.get("x0", -1.0))
    times = np.asarray(protocol.times, dtype=float)
    u, lam_p, lam_m = _singpert_modes(np.array([eps]))
    lam_p, lam_m = complex(lam_p[0]), complex(lam_m[0])
    u = float(u[0])
    # dλ/deps via implicit differentiation of λ² + (1+u)λ + 2u = 0, u = 1/eps
    dlam_p = u * u * (lam_p + 2.0) / (2.0 * lam_p + 1.0 + u)
    dlam_m = u * u * (lam_m + 2.0) / (2.0 * lam_m + 1.0 + u)
    z0x = x0 - 1.0
    z0y = y0 - 1.0
    dl = lam_m - lam_p
    c_p = (z0y + (1.0 + lam_m) * z0x) / dl
    c_m = z0x - c_p
    dcp_dlp = c_p / dl
    dcp_dlm = (z0x - c_p) / dl
    dcp_de = dcp_dlp * dlam_p + dcp_dlm * dlam_m
    dcm_de = -dcp_de
    dcp_dy0 = 1.0 / dl
    dcm_dy0 = -dcp_dy0
    e_p = np.exp(lam_p * times)
    e_m = np.exp(lam_m * times)
    dy_de = (
        -(dlam_p * c_p + (1.0 + lam_p) * dcp_de + (1.0 + lam_p) * c_p * times * dlam_p) * e_p
        - (dlam_m * c_m + (1.0 + lam_m) * dcm_de + (1.0 + lam_m) * c_m * times * dlam_m) * e_m
    )
    dy_dy0 = -(1.0 + lam_p) * dcp_dy0 * e_p - (1.0 + lam_m) * dcm_dy0 * e_m
    return np.column_stack([np.real(dy_de), np.real(dy_dy0)])


def singpert_xy(inputs, times, x0: float = -1.0):
    """Both state variables of the fast-slow pair at the given times."""
    p = _as_batch(inputs, 2, "singpert")
    eps, y0 = p[:, 0], p[:, 1]
    times = np.asarray(times, dtype=float)
    _, lam_p, lam_m = _singpert_modes(eps)
    z0x = x0 - 1.0
    z0y = y0 - 1.0
    c_p = (z0y + (1.0 + lam_m) * z0x) / (lam_m - lam_p)
    c_m = z0x - c_p
    e_p = np.exp(lam_p[:, None] * times[None, :])
    e_m = np.exp(lam_m[:, None] * times[None, :])
    x = 1.0 + c_p[:, None] * e_p + c_m[:, None] * e_m
    y = 1.0 - (1.0 + lam_p)[:, None] * c_p[:, None] * e_p \
        - (1.0 + lam_m)[:, None] * c_m[:, None] * e_m
    return np.real(x), np.real(y)


# ---------------------------------------------------------------------------
# regpert: x' = -x + eps*x^3, exact solution
# ---------------------------------------------------------------------------

def regpert_response(inputs, protocol=None) -> np.ndarray:
    """x(t) = (eps + e^{2t}(x0^-2 - eps))^{-1/2}; NaN rows past blow-up.

    inputs columns: (x0, eps).
    """
    protocol = protocol or REGPERT_PROTOCOL
    p = _as_batch(inputs, 2, "regpert")
    x0, eps = p[:, 0], p[:, 1]
    if np.any(x0 <= 0):
        raise ConfigurationError("regpert requires x0 > 0")
    times = np.asarray(protocol.times, dtype=float)
    radicand = eps[:, None] + np.exp(2.0 * times[None, :]) * (x0 ** -2 - eps)[:, None]
    with np.errstate(invalid="ignore", divide="ignore"):
        x = np.where(radicand > 0, radicand, np.nan) ** -0.5
    bad = ~np.all(np.isfinite(x), axis=1)
    x[bad] = np.nan
    return x


# ---------------------------------------------------------------------------
# abc: A <-> B -> C with exact two-mode solution for C(t), (A,B,C)(0)=(1,0,0)
# ---------------------------------------------------------------------------

def _abc_modes(k1, km1, k2):
    """Stable decay rates of the species chain; cancellation-free forms."""
    S = k1 + km1 + k2
    disc = km1 * km1 + 2.0 * km1 * (k1 + k2) + (k1 - k2) ** 2
    if np.any(disc < 0):
        raise NumericError("species-chain discriminant went negative")
    sq = np.sqrt(disc)
    lam_p = -2.0 * k1 * k2 / (S + sq)
    lam_m = -0.5 * (S + sq)
    return S, sq, lam_p, lam_m


def abc_response(inputs, protocol=None) -> np.ndarray:
    """Product concentration C(t) from the exact solution.

    inputs columns: (k1, km1, k2), all positive.
    """
    protocol = protocol or ABC_PROTOCOL
    p = _as_batch(inputs, 3, "abc")
    if np.any(p <= 0):
        raise ConfigurationError("abc rate constants must be positive")
    k1, km1, k2 = p[:, 0], p[:, 1], p[:, 2]
    times = np.asarray(protocol.times, dtype=float)
    _, sq, lam_p, lam_m = _abc_modes(k1, km1, k2)
    e_p = np.exp(lam_p[:, None] * times[None, :])
    e_m = np.exp(lam_m[:, None] * times[None, :])
    return 1.0 + (lam_m[:, None] * e_p - lam_p[:, None] * e_m) / sq[:, None]


@dataclass(frozen=True)
class AbcEffective:
    """Effective-parameter summary of one species-chain parameter point."""

    lam_plus: float
    lam_minus: float
    delta_lam: float
    r: float
    k_eff: float
    k_eff_qssa: float
    eps_compact: float
    in_regime: bool
    kappa1: float
    kappa2: float
    times: tuple


def abc_monitor_times(p, n_times: int = 5, window=(0.5, 5.0)) -> tuple:
    """Uniform monitoring grid on [w0, w1] in units of the slow decay time."""
    _, _, lam_p, _ = _abc_modes(*[np.asarray([v], dtype=float) for v in p])
    rate = abs(float(lam_p[0]))
    lo, hi = float(window[0]) / rate, float(window[1]) / rate
    return tuple(np.linspace(lo, hi, int(n_times)))


def abc_effective(p, eps_star: float = 0.109375, n_times: int = 5,
                  window=(0.5, 5.0)) -> AbcEffective:
    """Exact effective quantities for rate constants p = (k1, km1, k2).

    ``eps_star`` is the regime threshold on the compactified separation
    parameter k1*k2/(k1+km1+k2)^2 (its value at timescale ratio r = 6).
    """
    k1, km1, k2 = (float(v) for v in p)
    if min(k1, km1, k2) <= 0:
        raise ConfigurationError("abc rate constants must be positive")
    if not 0 < eps_star < 0.25:
        raise ConfigurationError("eps_star must lie in (0, 1/4)")
    arr = np.asarray
    S, sq, lam_p, lam_m = _abc_modes(arr([k1]), arr([km1]), arr([k2]))
    S, sq, lam_p, lam_m = float(S[0]), float(sq[0]), float(lam_p[0]), float(lam_m[0])
    k_eff = k1 * k2 / S
    k_eff_qssa = k1 * k2 / (km1 + k2)
    eps_c = k1 * k2 / (S * S)
    r = sq / abs(lam_p)
    s_star = math.sqrt(1.0 - 4.0 * eps_star)
    shift = 2.0 * eps_star / (1.0 - 4.0 * eps_star)
    v1 = k1 / km1 - shift
    v2 = k2 / km1 - shift
    kap1 = ((1.0 + s_star) * v1 + (-1.0 + s_star) * v2) / math.sqrt(2.0)
    kap2 = ((-1.0 + s_star) * v1 + (1.0 + s_star) * v2) / math.sqrt(2.0)
    return AbcEffective(
        lam_plus=lam_p,
        lam_minus=lam_m,
        delta_lam=sq,
        r=r,
        k_eff=k_eff,
        k_eff_qssa=k_eff_qssa,
        eps_compact=eps_c,
        in_regime=eps_c < eps_star,
        kappa1=kap1,
        kappa2=kap2,
        times=abc_monitor_times((k1, km1, k2), n_times=n_times, window=window),
    )


# ---------------------------------------------------------------------------
# mmh: rescaled two-species enzyme kinetics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MmhParameters:
    """Enzyme-kinetics parameter point in both coordinate systems."""

    # rescaled coordinates
    sigma: float
    K_M: float
    V_M: float
    kappa: float
    eps: float
    # dimensional coordinates
    S_T: float
    E_T: float
    k1: float
    km1: float
    k2: float
    # derived scales
    t_s: float
    C_bar: float
    eps_h: float


def mmh_from_dimensional(S_T, E_T, k1, km1, k2) -> MmhParameters:
    """Map (S_T, E_T, k1, k-1, k2) to the rescaled parameter set."""
    vals = [float(v) for v in (S_T, E_T, k1, km1, k2)]
    if min(vals) <= 0:
        raise ConfigurationError("all dimensional kinetics parameters must be positive")
    S_T, E_T, k1, km1, k2 = vals
    K_M = (km1 + k2) / k1
    V_M = k2 * E_T
    sigma = S_T / K_M
    kappa = km1 / k2
    eps = E_T / (S_T + K_M)
    return MmhParameters(
        sigma=sigma, K_M=K_M, V_M=V_M, kappa=kappa, eps=eps,
        S_T=S_T, E_T=E_T, k1=k1, km1=km1, k2=k2,
        t_s=(S_T + K_M) / V_M,
        C_bar=E_T * S_T / (S_T + K_M),
        eps_h=(1.0 + 1.0 / sigma) * eps,
    )


def mmh_from_rescaled(sigma, K_M, V_M, kappa, eps) -> MmhParameters:
    """Map (sigma, K_M, V_M, kappa, eps) back to dimensional parameters."""
    vals = [float(v) for v in (sigma, K_M, V_M, kappa, eps)]
    if min(vals) <= 0:
        raise ConfigurationError("all rescaled kinetics parameters must be positive")
    sigma, K_M, V_M, kappa, eps = vals
    S_T = sigma * K_M
    E_T = eps * K_M * (sigma + 1.0)
    k2 = V_M / E_T
    km1 = kappa * k2
    k1 = (kappa + 1.0) * k2 / K_M
    return MmhParameters(
        sigma=sigma, K_M=K_M, V_M=V_M, kappa=kappa, eps=eps,
        S_T=S_T, E_T=E_T, k1=k1, km1=km1, k2=k2,
        t_s=(S_T + K_M) / V_M,
        C_bar=E_T * S_T / (S_T + K_M),
        eps_h=(1.0 + 1.0 / sigma) * eps,
    )


def mmh_field(eps, sigma, kappa):
    """Right-hand side and Jacobian of the rescaled kinetics system."""

    def f(t, y):
        s, c = y
        bracket = (1.0 + sigma) * s - sigma * c * s
        return np.array([
            -(kappa + 1.0) * bracket + kappa * c,
            (kappa + 1.0) * (bracket - c) / eps,
        ])

    def jac(t, y):
        s, c = y
        return np.array([
            [-(kappa + 1.0) * ((1.0 + sigma) - sigma * c),
             (kappa + 1.0) * sigma * s + kappa],
            [(kappa + 1.0) * ((1.0 + sigma) - sigma * c) / eps,
             (kappa + 1.0) * (-sigma * s - 1.0) / eps],
        ])

    return f, jac


def mmh_trajectory(eps, sigma, kappa, t1, rtol=1e-8, atol=1e-10) -> Trajectory:
    """Integrate the rescaled kinetics from (s, c)(0) = (1, 0) to t1.

    Uses the implicit scheme below the stiffness switch on eps, the explicit
    one above it; routed through the compiled core when available.
    """
    if min(eps, sigma, kappa) <= 0:
        raise ConfigurationError("mmh parameters must be positive")
    stiff = eps < STIFFNESS_SWITCH
    y0 = np.array([1.0, 0.0])
    if backend.use_compiled():
        ts, ys, fs, _ = backend.speedups().integrate_builtin(
            backend.KIND_KINETICS, np.array([eps, sigma, kappa]),
            0.0, float(t1), y0, rtol, atol, stiff, _ode_py.MAX_STEPS_DEFAULT,
        )
        return Trajectory(ts=ts, ys=ys, fs=fs)
    f, jac = mmh_field(eps, sigma, kappa)
    return integrate_ivp(f, (0.0, float(t1)), y0, rtol=rtol, atol=atol,
                         stiff=stiff, jac=jac)


def mmh_response(inputs, protocol=None, rtol=1e-8, atol=1e-10) -> np.ndarray:
    """Monitored complex fraction c(t); one integration per input row.

    inputs columns: (eps, sigma, kappa).
    """
    protocol = protocol or MMH_PROTOCOL
    p = _as_batch(inputs, 3, "mmh")
    times = np.asarray(protocol.times, dtype=float)
    out = np.empty((p.shape[0], times.size))
    for i, (eps, sigma, kappa) in enumerate(p):
        try:
            traj = mmh_trajectory(eps, sigma, kappa, times[-1], rtol=rtol, atol=atol)
            out[i] = traj(times)[:, 1]
        except (NumericError, RuntimeError):
            out[i] = np.nan
    return out


def mmh_reduced_response(sigma, times, rtol=1e-10, atol=1e-12):
    """Slow-manifold reduced kinetics: returns (s, c, p) at the given times.

    Integrates ds/dt = -(1 + 1/sigma) * s / (s + 1/sigma) from s(0) = 1 and
    applies the slaved relations c = (1+sigma)s/(1+sigma*s), p = 1 - s.
    """
    sigma = float(sigma)
    if sigma <= 0:
        raise ConfigurationError("sigma must be positive")
    times = np.asarray(times, dtype=float)

    def f(t, y):
        return np.array([-(1.0 + 1.0 / sigma) * y[0] / (y[0] + 1.0 / sigma)])

    traj = integrate_ivp(f, (0.0, float(times[-1])), np.array([1.0]),
                         rtol=rtol, atol=atol)
    s = traj(times)[:, 0]
    c = (1.0 + sigma) * s / (1.0 + sigma * s)
    return s, c, 1.0 - s


# ---------------------------------------------------------------------------
# henon: exponential latents behind a coupled quadratic observation
# ---------------------------------------------------------------------------

HENON_A = 1.4
HENON_B = 0.3


def henon_parameter_map(lam, a):
    """Push (lam, a) through two iterations of the quadratic recurrence
    (u, w) -> (1 - A u^2 + w, B u) started at (u0, w0) = (lam, a).

    Returns the iterate (u2, w2); bijective with the inverse below.
    """
    u1 = 1.0 - HENON_A * np.asarray(lam, dtype=float) ** 2 + np.asarray(a, dtype=float)
    w1 = HENON_B * np.asarray(lam, dtype=float)
    u2 = 1.0 - HENON_A * u1 * u1 + w1
    w2 = HENON_B * u1
    return u2, w2


def henon_parameter_map_inverse(u2, w2):
    """Exact inverse of :func:`henon_parameter_map`."""
    u2 = np.asarray(u2, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    u1 = w2 / HENON_B
    lam = (u2 - 1.0 + HENON_A * u1 * u1) / HENON_B
    a = u1 - 1.0 + HENON_A * lam * lam
    return lam, a


def observation_fixed_point(X, Y, a, b, tol: float = 1e-12, max_iter: int = 100):
    """Solve the coupled observation x = X + b y^2, y = Y + a x^2.

    Fixed-point iteration seeded at (X, Y), elementwise over arrays.
    Returns (x, y, converged_mask); divergent entries come back NaN.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float)
    x = np.broadcast_to(X, np.broadcast(X, Y).shape).copy()
    y = np.broadcast_to(Y, x.shape).copy()
    delta = np.full(x.shape, np.inf)
    for _ in range(max_iter):
        with np.errstate(invalid="ignore", over="ignore"):
            xn = X + b * y * y
            yn = Y + a * x * x
            bad = ~np.isfinite(xn) | ~np.isfinite(yn) | (np.abs(xn) > 1e8) | (np.abs(yn) > 1e8)
        xn = np.where(bad, np.nan, xn)
        yn = np.where(bad, np.nan, yn)
        delta = np.maximum(np.abs(xn - x), np.abs(yn - y))
        x, y = xn, yn
        live = np.isfinite(delta)
        if not live.any() or delta[live].max() < tol:
            break
    with np.errstate(invalid="ignore"):
        converged = np.isfinite(x) & np.isfinite(y) & (delta < tol)
    return x, y, converged


def henon_response(inputs, protocol=None) -> np.ndarray:
    """Observed (x, y) trajectory pairs for pushed-forward inputs (u2, w2).

    The latent dynamics are X(t) = X0 e^{-lam t}, Y(t) = Y0 e^{-t/eps}; the
    observation transform couples them quadratically.  Output columns are
    interleaved (x(t1), y(t1), x(t2), y(t2), ...).  Rows where the
    observation transform diverges are NaN.
    """
    protocol = protocol or HENON_PROTOCOL
    p = _as_batch(inputs, 2, "henon")
    fixed = protocol.fixed
    eps = float(fixed.get("eps", 1e-3))
    b = float(fixed.get("b", 1e-2))
    X0 = float(fixed.get("X0", 1.0))
    Y0 = float(fixed.get("Y0", 1.0))
    times = np.asarray(protocol.times, dtype=float)
    lam, a = henon_parameter_map_inverse(p[:, 0], p[:, 1])
    X = X0 * np.exp(-lam[:, None] * times[None, :])
    Y = Y0 * np.exp(-times / eps)[None, :] * np.ones_like(lam)[:, None]
    x, y, ok = observation_fixed_point(X, Y, a[:, None], b)
    out = np.empty((p.shape[0], 2 * times.size))
    out[:, 0::2] = x
    out[:, 1::2] = y
    out[~np.all(ok, axis=1)] = np.nan
    return out


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

TOY_PROTOCOL = ObservationProtocol(variable="f", times=())
SINGPERT_PROTOCOL = ObservationProtocol(
    variable="y", times=(0.5, 1.0, 1.5), fixed={"x0": -1.0})
REGPERT_PROTOCOL = ObservationProtocol(variable="x", times=(0.25, 1.0, 1.75))
ABC_REFERENCE = (0.1, 1000.0, 1000.0)
ABC_PROTOCOL = ObservationProtocol(variable="C", times=abc_monitor_times(ABC_REFERENCE))
MMH_PROTOCOL = ObservationProtocol(
    variable="c", times=(0.5, 1.0, 1.5), fixed={"s0": 1.0, "c0": 0.0})
HENON_PROTOCOL = ObservationProtocol(
    variable="xy", times=tuple(np.linspace(0.1, 1.0, 10)),
    fixed={"eps": 1e-3, "b": 1e-2, "X0": 1.0, "Y0": 1.0})

MODELS = {
    "toy": ModelDefinition(
        model_id="toy",
        input_names=("p1", "p2"),
        admissible_ranges=((0.05, 5.0), (0.05, 5.0)),
        solver_kind="closed-form",
        default_protocol=TOY_PROTOCOL,
        evaluate=toy_response,
        jacobian=toy_jacobian,
    ),
    "singpert": ModelDefinition(
        model_id="singpert",
        input_names=("eps", "y0"),
        admissible_ranges=((1e-3, 1.0), (3.0, 5.0)),
        solver_kind="closed-form",
        default_protocol=SINGPERT_PROTOCOL,
        evaluate=singpert_response,
        jacobian=singpert_jacobian,
    ),
    "regpert": ModelDefinition(
        model_id="regpert",
        input_names=("x0", "eps"),
        admissible_ranges=((1.0, 2.5), (1e-3, 1e-1)),
        solver_kind="closed-form",
        default_protocol=REGPERT_PROTOCOL,
        evaluate=regpert_response,
    ),
    "abc": ModelDefinition(
        model_id="abc",
        input_names=("k1", "km1", "k2"),
        admissible_ranges=((1e-3, 1e3), (1e-3, 1e3), (1e-3, 1e3)),
        solver_kind="closed-form",
        default_protocol=ABC_PROTOCOL,
        evaluate=abc_response,
    ),
    "mmh": ModelDefinition(
        model_id="mmh",
        input_names=("eps", "sigma", "kappa"),
        admissible_ranges=((1e-4, 1.0), (1e-2, 1e2), (1e-2, 1e2)),
        solver_kind="stiff-switch",
        default_protocol=MMH_PROTOCOL,
        evaluate=mmh_response,
    ),
    "henon": ModelDefinition(
        model_id="henon",
        input_names=("u2", "w2"),
        admissible_ranges=((-2.0, 30.0), (-1.5, 0.7)),
        solver_kind="closed-form",
        default_protocol=HENON_PROTOCOL,
        evaluate=henon_response,
    ),
}


def get_model(model_id: str) -> ModelDefinition:
    try:
        return MODELS[model_id]
    except KeyError:
        raise ConfigurationError(
            f"unknown model {model_id!r}; known: {sorted(MODELS)}"
        ) from None
