"""Input-space samplers, dataset assembly, and good-set construction.

A *good set* is the preimage of a small output ball: inputs whose responses
sit within a fitting tolerance of a reference response.  It can be carved
out of a sampled dataset by filtering, or reached directly by descending
the squared-residual cost from arbitrary starting points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dmaps import PointCloud
from .errors import ConfigurationError, NumericError
from .models import ModelDefinition, ObservationProtocol

__all__ = [
    "SamplerSpec",
    "GoodSetSpec",
    "Dataset",
    "DescentResult",
    "sample_inputs",
    "generate_dataset",
    "filter_good",
    "descend_to_good_set",
]

AXIS_KINDS = ("uniform", "log-uniform", "grid")

# central-difference step policy shared by every finite-difference gradient
FD_RELATIVE_STEP = 1e-6
FD_ABSOLUTE_FLOOR = 1e-9


@dataclass(frozen=True)
class SamplerSpec:
    """Per-axis ranges and spacing plus a count and a seed.

    Random axes (uniform, log-uniform) draw ``count`` samples; grid axes
    build a lattice, with ``count`` giving points per axis (int) or per-axis
    counts (tuple).  Grid and random axes cannot be mixed.
    """

    axes: tuple
    count: object = 100
    seed: int = 0

    def __post_init__(self):
        axes = tuple((float(lo), float(hi), str(kind)) for lo, hi, kind in self.axes)
        object.__setattr__(self, "axes", axes)
        if not axes:
            raise ConfigurationError("sampler needs at least one axis")
        for lo, hi, kind in axes:
            if kind not in AXIS_KINDS:
                raise ConfigurationError(f"unknown axis kind {kind!r}")
            if not (np.isfinite(lo) and np.isfinite(hi)) or lo > hi:
                raise ConfigurationError("axis range must be a finite [lo, hi]")
            if kind == "log-uniform" and lo <= 0:
                raise ConfigurationError("log-uniform axes need positive bounds")
        kinds = {kind for _, _, kind in axes}
        if "grid" in kinds and kinds != {"grid"}:
            raise ConfigurationError("grid axes cannot be mixed with random axes")
        if self.is_grid:
            counts = self.grid_counts
            if any(c < 1 for c in counts):
                raise ConfigurationError("grid counts must be at least 1")
        else:
            if not isinstance(self.count, (int, np.integer)) or self.count < 1:
                raise ConfigurationError("sample count must be a positive integer")

    @property
    def is_grid(self) -> bool:
        return self.axes[0][2] == "grid"

    @property
    def grid_counts(self) -> tuple:
        if isinstance(self.count, (int, np.integer)):
            return (int(self.count),) * len(self.axes)
        counts = tuple(int(c) for c in self.count)
        if len(counts) != len(self.axes):
            raise ConfigurationError("per-axis grid counts must match axis count")
        return counts

    @property
    def total(self) -> int:
        if self.is_grid:
            return int(np.prod(self.grid_counts))
        return int(self.count)


@dataclass(frozen=True)
class GoodSetSpec:
    """Reference input, its response, and the fitting tolerance.

    The cost is the squared residual norm ``c(p) = ||f(p) - f*||^2``; the
    good set itself is defined by the residual norm staying below delta.
    """

    theta: np.ndarray
    f_star: np.ndarray
    delta: float

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float).reshape(-1)
        f_star = np.asarray(self.f_star, dtype=float).reshape(-1)
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "f_star", f_star)
        if not np.all(np.isfinite(f_star)):
            raise ConfigurationError("reference output must be finite")
        if not self.delta > 0:
            raise ConfigurationError("tolerance must be positive")

    @classmethod
    def for_reference(cls, model: ModelDefinition, theta, delta: float,
                      protocol: Optional[ObservationProtocol] = None):
        protocol = protocol or model.default_protocol
        f_star = model.evaluate(np.asarray(theta, dtype=float)[None, :],
                                protocol)[0]
        return cls(theta=theta, f_star=f_star, delta=delta)

    def residuals(self, outputs) -> np.ndarray:
        outputs = np.asarray(outputs, dtype=float)
        return np.linalg.norm(outputs - self.f_star, axis=-1)

    def cost(self, outputs) -> np.ndarray:
        return self.residuals(outputs) ** 2


@dataclass(frozen=True)
class Dataset:
    """Sampled inputs with responses and the manifest describing the run.

    Holds raw arrays so that degenerate subsets (empty, single row) remain
    representable; ``cloud`` materializes the embedding-ready view and
    therefore requires at least two rows.
    """

    inputs: np.ndarray
    outputs: Optional[np.ndarray]
    ids: np.ndarray
    manifest: dict

    def __post_init__(self):
        object.__setattr__(self, "inputs", np.asarray(self.inputs, dtype=float))
        if self.outputs is not None:
            object.__setattr__(self, "outputs",
                               np.asarray(self.outputs, dtype=float))
        object.__setattr__(self, "ids", np.asarray(self.ids, dtype=int))

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def cloud(self) -> PointCloud:
        return PointCloud(inputs=self.inputs, outputs=self.outputs,
                          ids=self.ids)


@dataclass(frozen=True)
class DescentResult:
    """Terminal points of the descent runs with their convergence record."""

    inputs: np.ndarray
    outputs: np.ndarray
    converged: np.ndarray
    iterations: np.ndarray
    costs: np.ndarray

    def __len__(self) -> int:
        return self.inputs.shape[0]

    def converged_cloud(self) -> PointCloud:
        mask = self.converged
        return PointCloud(inputs=self.inputs[mask], outputs=self.outputs[mask],
                          ids=np.flatnonzero(mask))


def sample_inputs(spec: SamplerSpec) -> np.ndarray:
    """Draw inputs per the sampler spec; deterministic given the seed.

    Random draws use one child RNG stream per sample, so the result does
    not depend on how samples are batched across workers, and a shorter
    draw is a prefix of a longer one.
    """
    if spec.is_grid:
        axes_vals = []
        for (lo, hi, _), n in zip(spec.axes, spec.grid_counts):
            if n == 1:
                axes_vals.append(np.array([(lo + hi) / 2.0]))
            else:
                axes_vals.append(np.linspace(lo, hi, n))
        mesh = np.meshgrid(*axes_vals, indexing="ij")
        return np.column_stack([m.reshape(-1) for m in mesh])
    n, d = spec.total, len(spec.axes)
    streams = np.random.SeedSequence(spec.seed).spawn(n)
    unit = np.empty((n, d))
    for i, child in enumerate(streams):
        unit[i] = np.random.default_rng(child).uniform(size=d)
    out = np.empty_like(unit)
    for j, (lo, hi, kind) in enumerate(spec.axes):
        if kind == "uniform":
            out[:, j] = lo + unit[:, j] * (hi - lo)
        else:
            out[:, j] = np.exp(np.log(lo) + unit[:, j] * (np.log(hi) - np.log(lo)))
    return out


def generate_dataset(model: ModelDefinition, protocol: Optional[ObservationProtocol],
                     sampler: SamplerSpec) -> Dataset:
    """Evaluate the model over sampled inputs, shedding failed rows.

    Failures (non-finite responses) are excluded from the dataset but
    counted, with their sample ids, in the manifest.
    """
    inputs = sample_inputs(sampler)
    if inputs.shape[1] != model.input_dim:
        raise ConfigurationError(
            f"sampler has {inputs.shape[1]} axes, model {model.model_id} "
            f"takes {model.input_dim} inputs")
    protocol = protocol or model.default_protocol
    outputs = model.evaluate(inputs, protocol)
    good = np.all(np.isfinite(outputs), axis=1)
    ids = np.arange(len(inputs))
    manifest = {
        "model": model.model_id,
        "protocol": {
            "variable": protocol.variable,
            "times": list(protocol.times),
            "fixed": dict(protocol.fixed),
        },
        "sampler": {
            "axes": [list(a) for a in sampler.axes],
            "count": (list(sampler.grid_counts) if sampler.is_grid
                      else int(sampler.count)),
            "seed": sampler.seed,
        },
        "seed": sampler.seed,
        "requested": int(len(inputs)),
        "failures": int(np.sum(~good)),
        "failed_ids": [int(i) for i in ids[~good]],
    }
    return Dataset(inputs=inputs[good], outputs=outputs[good], ids=ids[good],
                   manifest=manifest)


def filter_good(dataset: Dataset, spec: GoodSetSpec) -> Dataset:
    """Keep the rows whose residual against the reference is below delta."""
    if dataset.outputs is None:
        raise ConfigurationError("good-set filtering needs outputs")
    keep = spec.residuals(dataset.outputs) < spec.delta
    manifest = dict(dataset.manifest)
    manifest["filter"] = {
        "delta": spec.delta,
        "theta": [float(v) for v in spec.theta],
        "kept": int(np.sum(keep)),
        "of": int(len(dataset)),
    }
    return Dataset(inputs=dataset.inputs[keep], outputs=dataset.outputs[keep],
                   ids=dataset.ids[keep], manifest=manifest)


def descend_to_good_set(model: ModelDefinition, spec: GoodSetSpec,
                        initializations, stop_residual: Optional[float] = None,
                        max_iters: int = 200,
                        protocol: Optional[ObservationProtocol] = None) -> DescentResult:
    """Gradient descent with Armijo backtracking on the squared residual.

    Each initialization runs independently until the residual norm drops
    below ``stop_residual`` (default: the spec's delta) or the iteration
    budget runs out, in which case its terminal carries a non-converged
    flag.  Runs advance in lockstep so every cost evaluation of a wave is
    one batched model call.  Raises when no run converges at all.
    """
    protocol = protocol or model.default_protocol
    inits = np.asarray(initializations, dtype=float)
    if inits.ndim != 2 or inits.shape[1] != model.input_dim:
        raise ConfigurationError("initializations must be (runs, input_dim)")
    threshold = spec.delta if stop_residual is None else float(stop_residual)
    if threshold <= 0:
        raise ConfigurationError("stopping threshold must be positive")
    stop_cost = threshold ** 2
    n_runs, dim = inits.shape

    def batch_outputs(points: np.ndarray) -> np.ndarray:
        try:
            return np.asarray(model.evaluate(points, protocol), dtype=float)
        except (ConfigurationError, NumericError):
            # some row violated the model domain; isolate it
            out = np.empty((len(points), len(spec.f_star)))
            for i, row in enumerate(points):
                try:
                    out[i] = model.evaluate(row[None, :], protocol)[0]
                except (ConfigurationError, NumericError):
                    out[i] = np.nan
            return out

    def batch_cost(points: np.ndarray) -> np.ndarray:
        out = batch_outputs(points)
        with np.errstate(invalid="ignore", over="ignore"):
            c = np.sum((out - spec.f_star) ** 2, axis=1)
        c[~np.isfinite(c)] = np.inf
        return c

    points = inits.copy()
    costs = batch_cost(points)
    iterations = np.zeros(n_runs, dtype=int)
    stalled = np.zeros(n_runs, dtype=bool)
    for _ in range(max_iters):
        act = np.flatnonzero((costs >= stop_cost) & ~stalled)
        if len(act) == 0:
            break
        cur = points[act]
        h = np.maximum(FD_RELATIVE_STEP * np.abs(cur), FD_ABSOLUTE_FLOOR)
        probes = []
        for j in range(dim):
            hi, lo = cur.copy(), cur.copy()
            hi[:, j] += h[:, j]
            lo[:, j] -= h[:, j]
            probes.append(hi)
            probes.append(lo)
        probe_costs = batch_cost(np.vstack(probes)).reshape(dim, 2, len(act))
        with np.errstate(invalid="ignore"):
            grad = ((probe_costs[:, 0, :] - probe_costs[:, 1, :]).T
                    / (2.0 * h))
        gnorm2 = np.einsum("ij,ij->i", grad, grad)
        dead = ~np.isfinite(gnorm2) | (gnorm2 == 0.0)
        stalled[act[dead]] = True
        live = ~dead
        act, grad, gnorm2 = act[live], grad[live], gnorm2[live]
        if len(act) == 0:
            continue
        iterations[act] += 1
        alpha = np.ones(len(act))
        pending = np.ones(len(act), dtype=bool)
        for _ in range(40):
            idx = np.flatnonzero(pending)
            if len(idx) == 0:
                break
            trials = points[act[idx]] - alpha[idx, None] * grad[idx]
            trial_costs = batch_cost(trials)
            ok = trial_costs <= (costs[act[idx]]
                                 - 1e-4 * alpha[idx] * gnorm2[idx])
            hit = idx[ok]
            points[act[hit]] = trials[ok]
            costs[act[hit]] = trial_costs[ok]
            pending[hit] = False
            alpha[idx[~ok]] *= 0.5
        stalled[act[pending]] = True
    converged = costs < stop_cost
    if not converged.any():
        raise NumericError("no descent run reached the stopping threshold",
                           best_cost=float(np.min(costs)),
                           threshold=stop_cost)
    outputs = batch_outputs(points)
    return DescentResult(inputs=points, outputs=outputs, converged=converged,
                         iterations=iterations, costs=costs)
