"""Statistical verdicts on embeddings and model outputs.

Dependence scores quantify how close a scatter is to a one-to-one
relation; level-set traces walk curves of constant embedding coordinate
through input space; harmonic tests flag eigenvectors that merely repeat
an earlier coordinate; histograms summarize output densities.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np
from scipy.spatial import cKDTree
from scipy.stats import ConstantInputWarning, spearmanr

from .dmaps import DiffusionSpectrum, _loo_residual, nystrom_extend
from .errors import ConfigurationError, NumericError
from .models import ModelDefinition, ObservationProtocol

__all__ = [
    "BIN_COUNT",
    "HARMONIC_NEIGHBORS",
    "HULL_FACTOR",
    "DependenceScore",
    "LevelSetTrace",
    "MonotonicityVerdict",
    "Histogram",
    "dependence_score",
    "dependence_report",
    "joint_dependence_score",
    "sloppiness_profile",
    "embedding_field",
    "level_set_trace",
    "monotonicity_along",
    "harmonic_test",
    "output_histogram",
]

BIN_COUNT = 20               # equal-count bins for the conditional-spread score
HARMONIC_NEIGHBORS = 16      # local-linear neighborhood for the harmonic test
HULL_FACTOR = 3.0            # trace stops this many median NN spacings out

_METHODS = ("spearman", "binned", "joint-binned")


@dataclass(frozen=True)
class DependenceScore:
    """How strongly one series determines another, in [0, 1]."""

    score: float
    method: str
    count: int

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ConfigurationError(f"unknown dependence method {self.method!r}")
        if not 0.0 <= self.score <= 1.0:
            raise ConfigurationError("score must lie in [0, 1]")


@dataclass(frozen=True)
class LevelSetTrace:
    """Polyline through input space holding one embedding coordinate fixed.

    Every point deviates from the target level by less than the tracer
    tolerance, consecutive points sit between half and twice the nominal
    step apart, and ``truncated`` records a corrector failure.
    """

    points: np.ndarray
    deviations: np.ndarray
    arclength: np.ndarray
    level: float
    step: float
    tolerance: float
    truncated: bool = False

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        dev = np.asarray(self.deviations, dtype=float)
        arc = np.asarray(self.arclength, dtype=float)
        if not (len(pts) == len(dev) == len(arc)):
            raise ConfigurationError("trace arrays must have equal lengths")
        if not np.all(np.isfinite(pts)):
            raise NumericError("trace contains non-finite points")
        if np.any(dev > self.tolerance):
            raise NumericError("trace point off the level set",
                               worst=float(dev.max()),
                               tolerance=self.tolerance)
        if len(pts) > 1:
            gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
            if np.any(gaps < 0.5 * self.step) or np.any(gaps > 2.0 * self.step):
                raise ConfigurationError("consecutive trace spacing escaped "
                                         "[step/2, 2*step]")
            if np.any(np.diff(arc) <= 0):
                raise ConfigurationError("arclength must increase")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "deviations", dev)
        object.__setattr__(self, "arclength", arc)

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MonotonicityVerdict:
    """Whether a secondary coordinate moves one way along a trace."""

    monotone: bool
    score: float
    zero_variation: bool
    values: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class Histogram:
    """Density-normalized histogram; bin masses integrate to one."""

    density: np.ndarray
    edges: np.ndarray

    def __post_init__(self):
        dens = np.asarray(self.density, dtype=float)
        edges = np.asarray(self.edges, dtype=float)
        if len(edges) != len(dens) + 1:
            raise ConfigurationError("edges must outnumber densities by one")
        mass = float(np.sum(dens * np.diff(edges)))
        if abs(mass - 1.0) > 1e-9:
            raise NumericError("histogram does not integrate to one",
                               mass=mass)
        object.__setattr__(self, "density", dens)
        object.__setattr__(self, "edges", edges)


def _abs_spearman(a: np.ndarray, b: np.ndarray) -> float:
    """|rank correlation|, mapping degenerate (constant) inputs to 0."""
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConstantInputWarning)
        rho = spearmanr(a, b).statistic
    return 0.0 if np.isnan(rho) else abs(float(rho))


def _clean_series(x, y):
    xa = np.asarray(x, dtype=float).ravel()
    ya = np.asarray(y, dtype=float).ravel()
    if len(xa) != len(ya):
        raise ConfigurationError("series lengths differ")
    if len(xa) < 10:
        raise ConfigurationError("need at least 10 paired samples")
    if not (np.all(np.isfinite(xa)) and np.all(np.isfinite(ya))):
        raise NumericError("series contain non-finite values")
    return xa, ya


def dependence_score(x, y, method: str = "spearman") -> DependenceScore:
    """Score how well x determines y.

    "spearman" takes the absolute rank correlation, so it rewards monotone
    relations only.  "binned" splits x into equal-count bins and compares
    the mean within-bin spread of y against its global spread, so any
    functional relation scores high, monotone or not.
    """
    xa, ya = _clean_series(x, y)
    if method == "spearman":
        score = _abs_spearman(xa, ya)
    elif method == "binned":
        global_spread = float(np.std(ya))
        if global_spread == 0.0:
            score = 1.0
        else:
            order = np.argsort(xa, kind="stable")
            spreads = [float(np.std(ya[chunk]))
                       for chunk in np.array_split(order, BIN_COUNT)
                       if len(chunk) > 0]
            score = 1.0 - float(np.mean(spreads)) / global_spread
    else:
        raise ConfigurationError(f"unknown dependence method {method!r}")
    return DependenceScore(score=float(np.clip(score, 0.0, 1.0)),
                           method=method, count=len(xa))


def dependence_report(x, y) -> dict:
    """Both pairwise dependence scores keyed by method name."""
    return {m: dependence_score(x, y, method=m)
            for m in ("spearman", "binned")}


def joint_dependence_score(u, v, y, bins: int = 16) -> DependenceScore:
    """Score how well the pair (u, v) jointly determines y.

    Two-dimensional analogue of the "binned" method: u is cut into
    equal-count bins, each bin is cut again along v, and the mean
    within-cell spread of y is compared against its global spread.
    An exact smooth relation scores about 1 - 1/bins, so the bin count
    bounds the attainable score; cells with fewer than two samples are
    skipped.
    """
    ua, ya = _clean_series(u, y)
    va, _ = _clean_series(v, y)
    if bins < 2:
        raise ConfigurationError("joint dependence needs at least 2 bins")
    global_spread = float(np.std(ya))
    if global_spread == 0.0:
        return DependenceScore(score=1.0, method="joint-binned", count=len(ya))
    spreads = []
    order_u = np.argsort(ua, kind="stable")
    for chunk in np.array_split(order_u, bins):
        if len(chunk) < 2:
            continue
        order_v = chunk[np.argsort(va[chunk], kind="stable")]
        for cell in np.array_split(order_v, bins):
            if len(cell) >= 2:
                spreads.append(float(np.std(ya[cell])))
    if not spreads:
        raise ConfigurationError("all joint cells were empty")
    score = 1.0 - float(np.mean(spreads)) / global_spread
    return DependenceScore(score=float(np.clip(score, 0.0, 1.0)),
                           method="joint-binned", count=len(ya))


def sloppiness_profile(dataset, input_index: int,
                       output_index: Optional[int] = None) -> float:
    """Relative output range along a one-parameter sweep.

    The dataset must hold all other input columns fixed.  Returns
    (max - min) / mean of the output norm (or of one output column).
    """
    inputs = np.asarray(dataset.inputs, dtype=float)
    outputs = np.asarray(dataset.outputs, dtype=float)
    n, dim = inputs.shape
    if not 0 <= input_index < dim:
        raise ConfigurationError("input index out of range")
    if n < 2:
        raise ConfigurationError("sweep needs at least two points")
    others = np.delete(inputs, input_index, axis=1)
    span = np.ptp(others, axis=0)
    scale = np.maximum(np.abs(others).max(axis=0), 1e-300)
    if np.any(span > 1e-9 * scale):
        raise ConfigurationError("sweep must hold other inputs fixed")
    if output_index is None:
        values = np.linalg.norm(outputs, axis=1)
    else:
        values = outputs[:, output_index]
    if not np.all(np.isfinite(values)):
        raise NumericError("sweep outputs contain non-finite values")
    lo, hi = float(values.min()), float(values.max())
    if hi == lo:
        return 0.0
    mean = float(values.mean())
    if mean == 0.0:
        raise NumericError("output norm averages to zero over the sweep")
    return (hi - lo) / mean


def embedding_field(spectrum: DiffusionSpectrum, index: int,
                    model: Optional[ModelDefinition] = None,
                    protocol: Optional[ObservationProtocol] = None,
                    outputs_fn: Optional[Callable] = None) -> Callable:
    """Pointwise input-space evaluator of one embedding coordinate.

    Kernels that measure output distances need the outputs of query
    points, so those fields run the model (or ``outputs_fn``) on the fly.
    """
    family = spectrum.spec.family
    needs_outputs = family != "input-only"
    if needs_outputs and outputs_fn is None:
        if family == "augmented-output":
            raise ConfigurationError(
                "delayed-output kernels need an explicit outputs_fn")
        if model is None:
            raise ConfigurationError(
                f"kernel family {family!r} needs a model to evaluate queries")
        proto = protocol or model.default_protocol

        def outputs_fn(pts):
            return model.evaluate(pts, proto)

    def field(points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        outs = outputs_fn(pts) if needs_outputs else None
        return nystrom_extend(spectrum, inputs=pts, outputs=outs,
                              indices=[index])[:, 0]

    return field


def _field_gradient(fun, point: np.ndarray, h: float) -> np.ndarray:
    dim = len(point)
    probes = np.repeat(point[None, :], 2 * dim, axis=0)
    for j in range(dim):
        probes[2 * j, j] += h
        probes[2 * j + 1, j] -= h
    vals = fun(probes)
    return (vals[0::2] - vals[1::2]) / (2.0 * h)


def _correct(fun, point, level, tolerance, h, max_newton=8):
    """Newton steps along the field gradient; returns (point, dev, grad, ok).

    Iterates toward a target 10x tighter than the emission bound so the
    leftover slack cannot accumulate into a sideways drift of the trace.
    """
    target = 0.1 * tolerance
    x = point.copy()
    grad = None
    for _ in range(max_newton):
        val = float(fun(x[None, :])[0])
        dev = abs(val - level)
        if not np.isfinite(dev):
            return x, np.inf, grad, False
        if dev <= target:
            if grad is None:
                grad = _field_gradient(fun, x, h)
            return x, dev, grad, True
        grad = _field_gradient(fun, x, h)
        g2 = float(np.dot(grad, grad))
        if not np.isfinite(g2) or g2 == 0.0:
            return x, dev, grad, False
        x = x - (val - level) / g2 * grad
    val = float(fun(x[None, :])[0])
    dev = abs(val - level)
    return x, dev, grad, bool(dev <= tolerance)


def _initial_tangent(grad: np.ndarray) -> np.ndarray:
    basis = np.zeros_like(grad)
    basis[int(np.argmin(np.abs(grad)))] = 1.0
    tangent = basis - np.dot(basis, grad) / np.dot(grad, grad) * grad
    return tangent / np.linalg.norm(tangent)


def level_set_trace(spectrum: DiffusionSpectrum, index: int, level: float,
                    seed, step: float,
                    model: Optional[ModelDefinition] = None,
                    protocol: Optional[ObservationProtocol] = None,
                    outputs_fn: Optional[Callable] = None,
                    tolerance: Optional[float] = None,
                    max_points: int = 400) -> LevelSetTrace:
    """Walk a constant-coordinate curve through input space.

    Predictor steps of length ``step`` along the local tangent alternate
    with Newton corrections transverse to it.  The walk leaves the seed in
    both directions and stops at the edge of the sampled region, when the
    corrector fails (flagged), or at the point budget.
    """
    fun = embedding_field(spectrum, index, model=model, protocol=protocol,
                          outputs_fn=outputs_fn)
    seed = np.asarray(seed, dtype=float).ravel()
    training = spectrum.cloud.inputs
    if seed.shape != (training.shape[1],):
        raise ConfigurationError("seed dimension does not match the cloud")
    if step <= 0:
        raise ConfigurationError("step must be positive")
    coord = spectrum.coordinate(index)
    coord_range = float(np.ptp(coord))
    if coord_range <= 1e-8 * max(float(np.abs(coord).max()), 1e-300):
        raise NumericError("field has no transverse direction: the "
                           "coordinate is constant over the cloud")
    if tolerance is None:
        tolerance = 1e-3 * coord_range
    tree = cKDTree(training)
    nn = tree.query(training, k=2)[0][:, 1]
    hull_radius = HULL_FACTOR * float(np.median(nn))
    if float(tree.query(seed)[0]) > hull_radius:
        raise ConfigurationError("seed lies outside the sampled region")
    h_fd = 1e-4 * step

    start = _correct(fun, seed, level, tolerance, h_fd)
    x0, dev0, grad0, ok = start
    if grad0 is None or not np.all(np.isfinite(grad0)):
        raise NumericError("field gradient unavailable at the seed")
    g2 = float(np.dot(grad0, grad0))
    if g2 == 0.0 or np.sqrt(g2) * step < 1e-9 * max(coord_range, 1e-300):
        raise NumericError("field has no transverse direction at the seed")
    if not ok:
        raise ConfigurationError(
            f"seed failed to correct onto the level set "
            f"(deviation {dev0:.3g}, tolerance {tolerance:.3g})")

    tangent0 = _initial_tangent(grad0)
    truncated = False
    sides = []
    budget = max(max_points - 1, 2)
    for direction in (tangent0, -tangent0):
        pts, devs = [], []
        x, tangent = x0, direction
        for _ in range(budget // 2):
            pred = x + step * tangent
            y, dev, grad, ok = _correct(fun, pred, level, tolerance, h_fd)
            if not ok:
                truncated = True
                break
            if float(tree.query(y)[0]) > hull_radius:
                break
            gap = float(np.linalg.norm(y - x))
            if not 0.5 * step <= gap <= 2.0 * step:
                break
            g2 = float(np.dot(grad, grad))
            if g2 == 0.0:
                truncated = True
                break
            new_tangent = tangent - np.dot(tangent, grad) / g2 * grad
            norm = float(np.linalg.norm(new_tangent))
            if norm < 1e-12:
                truncated = True
                break
            pts.append(y)
            devs.append(dev)
            x, tangent = y, new_tangent / norm
        sides.append((pts, devs))

    (fwd, fdev), (bwd, bdev) = sides
    points = np.array(bwd[::-1] + [x0] + fwd)
    deviations = np.array(bdev[::-1] + [dev0] + fdev)
    if len(points) > 1:
        gaps = np.linalg.norm(np.diff(points, axis=0), axis=1)
        arclength = np.concatenate([[0.0], np.cumsum(gaps)])
    else:
        arclength = np.zeros(1)
    return LevelSetTrace(points=points, deviations=deviations,
                         arclength=arclength, level=float(level),
                         step=float(step), tolerance=float(tolerance),
                         truncated=truncated)


def monotonicity_along(trace: LevelSetTrace,
                       secondary: Union[Callable, np.ndarray],
                       variation_floor: float = 0.0) -> MonotonicityVerdict:
    """Judge whether a secondary coordinate is monotone along a trace.

    The verdict demands strictly one-signed consecutive differences; the
    score is the absolute rank correlation against arclength.  Spans at or
    below ``variation_floor`` (pass the tracer tolerance when the secondary
    is itself an embedding coordinate) count as no variation at all.
    """
    if len(trace) < 10:
        raise ConfigurationError("trace too short to judge monotonicity")
    if callable(secondary):
        values = np.asarray(secondary(trace.points), dtype=float).ravel()
    else:
        values = np.asarray(secondary, dtype=float).ravel()
    if values.shape != (len(trace),):
        raise ConfigurationError("secondary values must match trace length")
    if not np.all(np.isfinite(values)):
        raise NumericError("secondary coordinate is non-finite on the trace")
    span = float(np.ptp(values))
    scale = max(float(np.abs(values).max()), 1e-300)
    if span <= max(variation_floor, 1e-12 * scale):
        return MonotonicityVerdict(monotone=False, score=0.0,
                                   zero_variation=True, values=values)
    diffs = np.diff(values)
    monotone = bool(np.all(diffs > 0) or np.all(diffs < 0))
    score = _abs_spearman(values, trace.arclength)
    return MonotonicityVerdict(monotone=monotone, score=score,
                               zero_variation=False, values=values)


def harmonic_test(candidate, base,
                  neighborhood: int = HARMONIC_NEIGHBORS) -> float:
    """Residual of predicting a candidate coordinate from a base one.

    Scores near 0 mean the candidate is locally a function of the base
    (a repeated harmonic); scores near 1 mean a genuinely new direction.
    """
    cand = np.asarray(candidate, dtype=float).ravel()
    bas = np.asarray(base, dtype=float).ravel()
    if cand.shape != bas.shape:
        raise ConfigurationError("candidate and base lengths differ")
    if len(cand) <= neighborhood:
        raise ConfigurationError("need more samples than the neighborhood")
    if not (np.all(np.isfinite(cand)) and np.all(np.isfinite(bas))):
        raise NumericError("coordinates contain non-finite values")
    return _loo_residual(bas[:, None], cand, neighborhood)


def output_histogram(values, bins: int) -> Histogram:
    """Density-normalized histogram of a scalar output sample."""
    vals = np.asarray(values, dtype=float).ravel()
    if len(vals) == 0:
        raise ConfigurationError("need at least one value")
    if not np.all(np.isfinite(vals)):
        raise NumericError("values contain non-finite entries")
    if not isinstance(bins, (int, np.integer)) or bins < 2:
        raise ConfigurationError("bin count must be an integer of at least 2")
    density, edges = np.histogram(vals, bins=int(bins), density=True)
    return Histogram(density=density, edges=edges)
