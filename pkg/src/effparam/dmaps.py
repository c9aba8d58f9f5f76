"""Diffusion-maps core with output-informed kernels.

The pipeline: pairwise squared dissimilarities -> Gaussian affinity ->
density normalization -> random-walk graph Laplacian -> spectral
decomposition -> embedding coordinates.  Four kernel families control which
data block feeds the dissimilarity:

* ``input-only``        squared distance between input vectors
* ``output-only``       squared distance between response vectors
* ``mixed``             both channels, each with its own denominator
* ``augmented-output``  squared distance between offset-pair responses

Everything downstream (scale selection, independent-coordinate selection,
Nystrom extension) operates on the resulting spectra.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .errors import ConfigurationError, NumericError

__all__ = [
    "PointCloud",
    "KernelSpec",
    "AffinityMatrix",
    "LaplacianParts",
    "DiffusionSpectrum",
    "EmbeddingSelection",
    "pairwise_dissimilarity",
    "build_affinity",
    "density_normalized_laplacian",
    "spectral_decompose",
    "compute_spectrum",
    "embed",
    "select_scale",
    "select_independent_coordinates",
    "nystrom_extend",
]

KERNEL_FAMILIES = ("input-only", "output-only", "mixed", "augmented-output")
DENSE_EIGH_LIMIT = 5000


@dataclass(frozen=True)
class PointCloud:
    """Paired samples: input vectors with optional response vectors."""

    inputs: np.ndarray
    outputs: Optional[np.ndarray] = None
    ids: Optional[np.ndarray] = None

    def __post_init__(self):
        inputs = np.atleast_2d(np.asarray(self.inputs, dtype=float))
        object.__setattr__(self, "inputs", inputs)
        L = inputs.shape[0]
        if L < 2:
            raise ConfigurationError("a point cloud needs at least 2 points")
        if not np.all(np.isfinite(inputs)):
            raise ConfigurationError("non-finite entries in input block")
        if self.outputs is not None:
            outputs = np.atleast_2d(np.asarray(self.outputs, dtype=float))
            if outputs.shape[0] != L:
                raise ConfigurationError(
                    f"output block has {outputs.shape[0]} rows, inputs have {L}")
            if not np.all(np.isfinite(outputs)):
                raise ConfigurationError("non-finite entries in output block")
            object.__setattr__(self, "outputs", outputs)
        ids = (np.arange(L) if self.ids is None
               else np.asarray(self.ids, dtype=int))
        if ids.shape != (L,) or len(np.unique(ids)) != L:
            raise ConfigurationError("ids must be unique and one per point")
        object.__setattr__(self, "ids", ids)

    def __len__(self) -> int:
        return self.inputs.shape[0]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def output_dim(self) -> Optional[int]:
        return None if self.outputs is None else self.outputs.shape[1]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus its scale.

    ``scale`` is the full denominator s applied to the squared distance, so
    callers convert whatever convention they quote a bandwidth in: a kernel
    written exp(-d^2/(2*eps)) supplies s = 2*eps, one written exp(-d^2/eps^2)
    supplies s = eps^2.  For the mixed family the response channel gets the
    second denominator s^(a/2): with s = eps^2 and exponent a that equals
    eps^a.
    """

    family: str
    scale: float
    exponent: float = 4.0
    offset: Optional[float] = None

    def __post_init__(self):
        if self.family not in KERNEL_FAMILIES:
            raise ConfigurationError(
                f"unknown kernel family {self.family!r}; known: {KERNEL_FAMILIES}")
        if not self.scale > 0:
            raise ConfigurationError("kernel scale must be positive")
        if self.family == "mixed" and not self.exponent > 0:
            raise ConfigurationError("mixed-kernel exponent must be positive")
        if self.offset is not None and not self.offset > 0:
            raise ConfigurationError("offset must be positive when given")

    @property
    def output_scale(self) -> float:
        return self.scale ** (self.exponent / 2.0)


@dataclass(frozen=True)
class AffinityMatrix:
    A: np.ndarray
    q: np.ndarray
    spec: KernelSpec


@dataclass(frozen=True)
class LaplacianParts:
    """Density-normalized operators feeding the spectral decomposition."""

    W: np.ndarray
    degree: np.ndarray        # D as a vector
    markov: np.ndarray        # M = D^-1 W
    laplacian: np.ndarray     # I - M
    q: np.ndarray             # affinity row sums, kept for extension
    spec: KernelSpec


@dataclass(frozen=True)
class DiffusionSpectrum:
    """Leading eigenpairs of the random-walk Laplacian of one cloud.

    Eigenvalues ascend from 0; eigenvectors are columns orthonormal under
    the stationary weights and begin with the constant vector.  The training
    cloud, its affinity row sums, and the kernel spec are retained so that
    new points can be extended into the same coordinates.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    stationary_weights: np.ndarray
    q: np.ndarray
    cloud: PointCloud
    spec: KernelSpec

    @property
    def n_components(self) -> int:
        return self.eigenvalues.size

    def coordinate(self, index: int) -> np.ndarray:
        return self.eigenvectors[:, index]


@dataclass(frozen=True)
class EmbeddingSelection:
    """Indices judged mutually independent, with all candidate scores."""

    indices: tuple
    scores: dict
    complete: bool = True


def _sq_dists(block: np.ndarray) -> np.ndarray:
    d = cdist(block, block, "sqeuclidean")
    np.fill_diagonal(d, 0.0)
    return d


def pairwise_dissimilarity(cloud: PointCloud, spec: KernelSpec):
    """Squared-distance matrix (or matrices) for the kernel family.

    Single-channel families return one L x L matrix; the mixed family
    returns ``(input_channel, output_channel)``.
    """
    if spec.family != "input-only" and cloud.outputs is None:
        raise ConfigurationError(
            f"kernel family {spec.family!r} needs an output block")
    if spec.family == "input-only":
        return _sq_dists(cloud.inputs)
    if spec.family in ("output-only", "augmented-output"):
        return _sq_dists(cloud.outputs)
    return _sq_dists(cloud.inputs), _sq_dists(cloud.outputs)


def build_affinity(distances, spec: KernelSpec) -> AffinityMatrix:
    """Gaussian affinity from squared distances; diagonal exactly 1."""
    if spec.family == "mixed":
        if not (isinstance(distances, tuple) and len(distances) == 2):
            raise ConfigurationError(
                "mixed family needs (input, output) distance channels")
        dp, df = distances
        A = np.exp(-dp / spec.scale - df / spec.output_scale)
    else:
        A = np.exp(-np.asarray(distances) / spec.scale)
    np.fill_diagonal(A, 1.0)
    q = A.sum(axis=1)
    return AffinityMatrix(A=A, q=q, spec=spec)


def density_normalized_laplacian(aff: AffinityMatrix) -> LaplacianParts:
    """Divide out the sampling density, then form the random-walk operators."""
    if np.any(aff.q <= 0):
        raise NumericError("affinity row sum hit zero; kernel should be positive")
    W = aff.A / np.outer(aff.q, aff.q)
    degree = W.sum(axis=1)
    markov = W / degree[:, None]
    laplacian = np.eye(W.shape[0]) - markov
    return LaplacianParts(W=W, degree=degree, markov=markov,
                          laplacian=laplacian, q=aff.q, spec=aff.spec)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def spectral_decompose(parts: LaplacianParts, k: int,
                       cloud: Optional[PointCloud] = None) -> DiffusionSpectrum:
    """Leading k+1 eigenpairs of the random-walk Laplacian.

    Works on the symmetric conjugate D^-1/2 W D^-1/2 so a symmetric dense
    (or, above the dense limit, truncated iterative) eigensolver applies,
    then maps eigenvectors back to the random-walk ones.  The back-mapped
    eigenvectors are scaled to be orthonormal under the stationary weights,
    which makes the leading one exactly the constant vector.
    """
    L = parts.W.shape[0]
    if not 0 <= k < L:
        raise ConfigurationError(f"need 0 <= k < {L}, got k={k}")
    root = np.sqrt(parts.degree)
    S = parts.W / np.outer(root, root)
    S = 0.5 * (S + S.T)
    if L <= DENSE_EIGH_LIMIT:
        mu, V = np.linalg.eigh(S)
        mu, V = mu[::-1][: k + 1], V[:, ::-1][:, : k + 1]
    else:
        from scipy.sparse.linalg import eigsh
        try:
            mu, V = eigsh(S, k=k + 1, which="LA")
        except Exception as exc:  # pragma: no cover - solver-dependent
            raise NumericError("eigensolver failed to converge",
                               size=L, requested=k + 1, detail=str(exc))
        order = np.argsort(mu)[::-1]
        mu, V = mu[order], V[:, order]
    lam = 1.0 - mu
    if lam[0] < -1e-8 or lam[-1] > 2.0 + 1e-8:
        raise NumericError("Laplacian spectrum left [0, 2]",
                           lam_min=float(lam[0]), lam_max=float(lam[-1]))
    lam = np.clip(lam, 0.0, 2.0)
    total = parts.degree.sum()
    psi = _fix_signs(np.sqrt(total) * V / root[:, None])
    return DiffusionSpectrum(
        eigenvalues=lam,
        eigenvectors=psi,
        stationary_weights=parts.degree / total,
        q=parts.q,
        cloud=cloud,
        spec=parts.spec,
    )


def compute_spectrum(cloud: PointCloud, spec: KernelSpec, k: int) -> DiffusionSpectrum:
    """Full pipeline: distances -> affinity -> normalization -> eigenpairs."""
    dist = pairwise_dissimilarity(cloud, spec)
    aff = build_affinity(dist, spec)
    parts = density_normalized_laplacian(aff)
    return spectral_decompose(parts, k, cloud=cloud)


def embed(spectrum: DiffusionSpectrum, indices, eps: float = 0.0,
          mode: str = "raw") -> np.ndarray:
    """Per-point coordinates for the requested eigenvector indices.

    ``raw`` returns eigenvector entries as plotted; ``scaled`` multiplies
    component i by e^(lambda_i * eps).
    """
    indices = [int(i) for i in np.atleast_1d(indices)]
    if any(i == 0 for i in indices):
        raise ConfigurationError("component 0 is constant; not an embedding axis")
    if any(not 1 <= i < spectrum.n_components for i in indices):
        raise ConfigurationError(
            f"indices must lie in [1, {spectrum.n_components - 1}]")
    if mode not in ("raw", "scaled"):
        raise ConfigurationError(f"unknown embed mode {mode!r}")
    coords = spectrum.eigenvectors[:, indices]
    if mode == "scaled":
        coords = coords * np.exp(spectrum.eigenvalues[indices] * eps)[None, :]
    return coords


def select_scale(*, n_points: Optional[int] = None,
                 intrinsic_dim: Optional[int] = None,
                 constant: float = 1.0,
                 distances: Optional[np.ndarray] = None,
                 multiplier: float = 1.0) -> float:
    """Kernel-scale selection.

    Formula mode (pass ``n_points`` and ``intrinsic_dim``): the error-bound
    minimizer C * N^(-2/(6+m)).  Median mode (pass ``distances``, a squared
    -distance matrix): multiplier times the median off-diagonal squared
    distance.
    """
    if distances is not None:
        if n_points is not None or intrinsic_dim is not None:
            raise ConfigurationError("pass either a cloud size or distances, not both")
        d = np.asarray(distances)
        vals = d[np.triu_indices_from(d, k=1)]
        if vals.size == 0:
            raise ConfigurationError("distance matrix too small for the median heuristic")
        if multiplier <= 0:
            raise ConfigurationError("multiplier must be positive")
        return float(multiplier * np.median(vals))
    if n_points is None or intrinsic_dim is None:
        raise ConfigurationError("formula mode needs n_points and intrinsic_dim")
    if n_points < 2:
        raise ConfigurationError("n_points must be at least 2")
    if intrinsic_dim < 1:
        raise ConfigurationError("intrinsic_dim must be at least 1")
    if constant <= 0:
        raise ConfigurationError("constant must be positive")
    return float(constant * n_points ** (-2.0 / (6.0 + intrinsic_dim)))


def _loo_residual(chosen_coords: np.ndarray, target: np.ndarray,
                  neighbors: int) -> float:
    """Leave-one-out kernel-weighted local-linear residual of target.

    Score 1 means the already-chosen coordinates carry no information about
    the candidate; near 0 means the candidate is a function of them.
    """
    L, c = chosen_coords.shape
    k = min(neighbors, L - 1)
    tree = cKDTree(chosen_coords)
    dist, idx = tree.query(chosen_coords, k=k + 1)
    nb, dnb = idx[:, 1:], dist[:, 1:]
    sig2 = np.maximum(np.median(dnb, axis=1) ** 2, 1e-300)
    wgt = np.exp(-(dnb ** 2) / sig2[:, None])
    X = np.concatenate([np.ones((L, k, 1)), chosen_coords[nb]], axis=2)
    t = target[nb]
    WX = X * wgt[:, :, None]
    G = np.einsum("lnc,lnd->lcd", WX, X)
    ridge = 1e-10 * np.trace(G, axis1=1, axis2=2)[:, None, None] / (c + 1)
    G = G + ridge * np.eye(c + 1)[None]
    b = np.einsum("lnc,ln->lc", WX, t)
    try:
        beta = np.linalg.solve(G, b[:, :, None])[:, :, 0]
    except np.linalg.LinAlgError:
        beta = np.stack([np.linalg.lstsq(Gi, bi, rcond=None)[0]
                         for Gi, bi in zip(G, b)])
    pred = beta[:, 0] + np.sum(beta[:, 1:] * chosen_coords, axis=1)
    score = np.sqrt(np.sum((target - pred) ** 2) / np.sum(target ** 2))
    return float(min(score, 1.0))


def select_independent_coordinates(spectrum: DiffusionSpectrum, count: int = 2,
                                   threshold: float = 0.2,
                                   neighbors: int = 16,
                                   max_candidates: Optional[int] = None
                                   ) -> EmbeddingSelection:
    """Pick eigenvectors that parameterize new directions.

    Walks the spectrum in eigenvalue order.  The first nontrivial
    eigenvector is always kept (score 1 by convention); each later candidate
    is kept when its leave-one-out local-linear residual against the
    already-kept coordinates exceeds ``threshold``.  Repeated harmonics of
    kept directions predict well and score low, so they are skipped.
    """
    if not 0 < threshold < 1:
        raise ConfigurationError("threshold must lie in (0, 1)")
    if count < 1:
        raise ConfigurationError("count must be at least 1")
    top = spectrum.n_components - 1
    if max_candidates is not None:
        top = min(top, max_candidates)
    if top < count:
        raise ConfigurationError(
            f"spectrum holds {top} candidates, fewer than count={count}")
    psi = spectrum.eigenvectors
    chosen = [1]
    scores = {1: 1.0}
    for k in range(2, top + 1):
        if len(chosen) >= count:
            break
        score = _loo_residual(psi[:, chosen], psi[:, k], neighbors)
        scores[k] = score
        if score > threshold:
            chosen.append(k)
    return EmbeddingSelection(indices=tuple(chosen), scores=scores,
                              complete=len(chosen) >= count)


def _cross_affinity(spectrum: DiffusionSpectrum, inputs, outputs) -> np.ndarray:
    spec = spectrum.spec
    cloud = spectrum.cloud
    if cloud is None:
        raise ConfigurationError("spectrum was built without its source cloud")

    def prep(block, dim, name):
        if block is None:
            raise ConfigurationError(f"kernel family {spec.family!r} needs {name}")
        block = np.atleast_2d(np.asarray(block, dtype=float))
        if block.shape[1] != dim:
            raise ConfigurationError(
                f"{name} must have {dim} columns, got {block.shape[1]}")
        return block

    if spec.family == "input-only":
        P = prep(inputs, cloud.input_dim, "an input block")
        return np.exp(-cdist(P, cloud.inputs, "sqeuclidean") / spec.scale)
    if spec.family in ("output-only", "augmented-output"):
        F = prep(outputs, cloud.output_dim, "an output block")
        return np.exp(-cdist(F, cloud.outputs, "sqeuclidean") / spec.scale)
    P = prep(inputs, cloud.input_dim, "an input block")
    F = prep(outputs, cloud.output_dim, "an output block")
    return np.exp(-cdist(P, cloud.inputs, "sqeuclidean") / spec.scale
                  - cdist(F, cloud.outputs, "sqeuclidean") / spec.output_scale)


def nystrom_extend(spectrum: DiffusionSpectrum, inputs=None, outputs=None,
                   indices=None) -> np.ndarray:
    """Embedding coordinates of new points in a training spectrum.

    Uses the training affinity row sums for the density normalization, so
    feeding back a training point reproduces its coordinates.  Components
    with Laplacian eigenvalue at 1 cannot be extended.
    """
    if indices is None:
        indices = list(range(spectrum.n_components))
    indices = [int(i) for i in np.atleast_1d(indices)]
    if any(not 0 <= i < spectrum.n_components for i in indices):
        raise ConfigurationError("extension index out of range")
    lam = spectrum.eigenvalues[indices]
    if np.any(lam >= 1.0 - 1e-10):
        raise NumericError("extension ill-posed: eigenvalue too close to 1",
                           eigenvalues=lam.tolist())
    A_x = _cross_affinity(spectrum, inputs, outputs)
    V = A_x / spectrum.q[None, :]
    # rows of all-underflowed affinities turn into NaN coordinates, which
    # callers treat as "query too far from the training data"
    with np.errstate(invalid="ignore"):
        M_hat = V / V.sum(axis=1, keepdims=True)
    return (M_hat @ spectrum.eigenvectors[:, indices]) / (1.0 - lam)[None, :]
