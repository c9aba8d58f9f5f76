"""Local sensitivity tools: Jacobians, singular spectra, gradient subspaces.

Everything here works pointwise in input space.  A Jacobian of the
input-to-output map is summarized by its singular values and the induced
metric tensor; collections of scalar-function gradients are averaged into
an outer-product matrix whose leading eigenvector defines a single
distinguished linear coordinate.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .errors import ConfigurationError, NumericError
from .dmaps import _fix_signs
from .models import ModelDefinition, ObservationProtocol
from .sampling import FD_ABSOLUTE_FLOOR, FD_RELATIVE_STEP

__all__ = [
    "RANK_RATIO_DEFAULT",
    "JacobianMatrix",
    "SensitivitySummary",
    "ActiveSubspace",
    "jacobian",
    "finite_difference_gradient",
    "sensitivity_summary",
    "active_subspace",
]

# singular values below this fraction of the largest do not count
# toward the effective rank
RANK_RATIO_DEFAULT = 1e-2

_METHODS = ("analytic", "finite-difference")


@dataclass(frozen=True)
class JacobianMatrix:
    """Derivative of the output vector with respect to the inputs.

    ``matrix`` has one row per output component and one column per input;
    ``method`` records which differentiation path produced it.
    """

    matrix: np.ndarray
    point: np.ndarray
    method: str

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=float)
        pt = np.asarray(self.point, dtype=float)
        if mat.ndim != 2:
            raise ConfigurationError("jacobian matrix must be 2-D")
        if pt.ndim != 1 or len(pt) != mat.shape[1]:
            raise ConfigurationError(
                "evaluation point length must match jacobian columns")
        if not np.all(np.isfinite(mat)):
            raise NumericError("jacobian contains non-finite entries")
        if self.method not in _METHODS:
            raise ConfigurationError(f"unknown jacobian method {self.method!r}")
        object.__setattr__(self, "matrix", mat)
        object.__setattr__(self, "point", pt)

    @property
    def n_outputs(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class SensitivitySummary:
    """Singular spectrum of a Jacobian and the metric tensor it induces."""

    singular_values: np.ndarray
    metric: np.ndarray
    rank: int
    rank_ratio: float

    def __post_init__(self):
        sv = np.asarray(self.singular_values, dtype=float)
        g = np.asarray(self.metric, dtype=float)
        if sv.ndim != 1 or np.any(sv < 0) or np.any(np.diff(sv) > 0):
            raise ConfigurationError(
                "singular values must be nonnegative and descending")
        if g.shape != (len(sv), len(sv)) or not np.allclose(g, g.T):
            raise ConfigurationError("metric must be symmetric with one row "
                                     "per input")
        if not 0 <= self.rank <= len(sv):
            raise ConfigurationError("rank out of range")
        object.__setattr__(self, "singular_values", sv)
        object.__setattr__(self, "metric", g)


@dataclass(frozen=True)
class ActiveSubspace:
    """Eigenstructure of the averaged gradient outer product.

    ``eigenvectors`` columns are orthonormal and ordered by descending
    eigenvalue; ``first_scores`` projects each sample onto the leading one.
    """

    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    first_scores: np.ndarray

    def __post_init__(self):
        cov = np.asarray(self.covariance, dtype=float)
        lam = np.asarray(self.eigenvalues, dtype=float)
        vecs = np.asarray(self.eigenvectors, dtype=float)
        m = cov.shape[0]
        if cov.shape != (m, m) or not np.allclose(cov, cov.T):
            raise ConfigurationError("covariance must be square symmetric")
        if lam.shape != (m,) or np.any(np.diff(lam) > 0) or np.any(lam < 0):
            raise ConfigurationError(
                "eigenvalues must be nonnegative and descending")
        if vecs.shape != (m, m):
            raise ConfigurationError("eigenvector matrix shape mismatch")
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "eigenvalues", lam)
        object.__setattr__(self, "eigenvectors", vecs)
        object.__setattr__(self, "first_scores",
                           np.asarray(self.first_scores, dtype=float))


def _fd_step(values: np.ndarray) -> np.ndarray:
    return np.maximum(FD_RELATIVE_STEP * np.abs(values), FD_ABSOLUTE_FLOOR)


def jacobian(model: ModelDefinition, p, protocol: Optional[ObservationProtocol] = None,
             method: str = "auto") -> JacobianMatrix:
    """Differentiate a model's output map at one input point.

    ``method`` may be "analytic" (requires the model to carry closed-form
    derivatives), "finite-difference", or "auto" which prefers analytic
    and falls back to central differences.
    """
    protocol = protocol or model.default_protocol
    pt = np.asarray(p, dtype=float).ravel()
    if len(pt) != model.input_dim:
        raise ConfigurationError(
            f"{model.model_id} expects {model.input_dim} inputs, got {len(pt)}")
    if method not in _METHODS + ("auto",):
        raise ConfigurationError(f"unknown jacobian method {method!r}")
    if method == "auto":
        method = "analytic" if model.jacobian is not None else "finite-difference"
    if method == "analytic":
        if model.jacobian is None:
            raise ConfigurationError(
                f"{model.model_id} has no analytic derivatives")
        return JacobianMatrix(matrix=model.jacobian(pt, protocol), point=pt,
                              method="analytic")
    h = _fd_step(pt)
    dim = len(pt)
    probes = np.repeat(pt[None, :], 2 * dim, axis=0)
    for j in range(dim):
        probes[2 * j, j] += h[j]
        probes[2 * j + 1, j] -= h[j]
    outputs = np.asarray(model.evaluate(probes, protocol), dtype=float)
    cols = (outputs[0::2] - outputs[1::2]) / (2.0 * h[:, None])
    return JacobianMatrix(matrix=cols.T, point=pt, method="finite-difference")


def finite_difference_gradient(fun: Callable[[np.ndarray], float],
                               x) -> np.ndarray:
    """Central-difference gradient of a scalar function at one point."""
    pt = np.asarray(x, dtype=float).ravel()
    h = _fd_step(pt)
    grad = np.empty_like(pt)
    for j in range(len(pt)):
        hi, lo = pt.copy(), pt.copy()
        hi[j] += h[j]
        lo[j] -= h[j]
        grad[j] = (float(fun(hi)) - float(fun(lo))) / (2.0 * h[j])
    if not np.all(np.isfinite(grad)):
        raise NumericError("gradient contains non-finite entries")
    return grad


def sensitivity_summary(J: JacobianMatrix,
                        rank_ratio: float = RANK_RATIO_DEFAULT) -> SensitivitySummary:
    """Singular spectrum, metric tensor, and effective rank of a Jacobian.

    A singular value counts toward the rank when it exceeds ``rank_ratio``
    times the largest one; a zero matrix has rank zero.
    """
    if not 0 < rank_ratio < 1:
        raise ConfigurationError("rank_ratio must lie in (0, 1)")
    sv = np.linalg.svd(J.matrix, compute_uv=False)
    g = J.matrix.T @ J.matrix
    g = 0.5 * (g + g.T)
    if sv[0] == 0.0:
        rank = 0
    else:
        rank = int(np.sum(sv / sv[0] >= rank_ratio))
    return SensitivitySummary(singular_values=sv, metric=g, rank=rank,
                              rank_ratio=float(rank_ratio))


def active_subspace(samples,
                    gradients: Union[Callable[[np.ndarray], np.ndarray], np.ndarray],
                    ) -> ActiveSubspace:
    """Average gradient outer products over samples and diagonalize.

    ``gradients`` is either a (samples, inputs) array of precomputed
    gradients or a callable mapping one sample to its gradient vector.
    The averaging weight is one over the number of samples.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    n, dim = pts.shape
    if n < 1:
        raise ConfigurationError("need at least one sample")
    if callable(gradients):
        grads = np.array([np.asarray(gradients(x), dtype=float).ravel()
                          for x in pts])
    else:
        grads = np.asarray(gradients, dtype=float)
    if grads.shape != (n, dim):
        raise ConfigurationError(
            f"gradients must have shape {(n, dim)}, got {grads.shape}")
    if not np.all(np.isfinite(grads)):
        raise NumericError("gradients contain non-finite entries")
    cov = grads.T @ grads / n
    cov = 0.5 * (cov + cov.T)
    lam, vecs = np.linalg.eigh(cov)
    lam, vecs = lam[::-1], vecs[:, ::-1]
    if np.any(lam < -1e-10 * max(lam[0], 1.0)):
        raise NumericError("gradient covariance is not positive semidefinite")
    lam = np.maximum(lam, 0.0)
    vecs = _fix_signs(vecs)
    scores = pts @ vecs[:, 0]
    return ActiveSubspace(covariance=cov, eigenvalues=lam, eigenvectors=vecs,
                          first_scores=scores)
