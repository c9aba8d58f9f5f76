"""CSV and JSON serialization for datasets, embeddings, and response curves.

Floats are written with ``repr``, the shortest decimal that parses back to
the identical binary value, so a written file re-read and re-written is
byte-stable.
"""

import csv
import hashlib
import json

import numpy as np

from .dmaps import DiffusionSpectrum
from .errors import ConfigurationError
from .pellet import ResponseCurve
from .sampling import Dataset

__all__ = [
    "format_float",
    "write_dataset_csv",
    "read_dataset_csv",
    "write_embedding_csv",
    "read_embedding_csv",
    "write_spectrum_sidecar",
    "write_curve_csv",
    "read_curve_csv",
    "write_json",
    "read_json",
    "config_hash",
]


def format_float(value) -> str:
    return repr(float(value))


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_table(path, header, rows) -> None:
    """Write a float table with one named column per header entry."""
    rows = np.asarray(rows, dtype=float)
    if rows.ndim != 2 or rows.shape[1] != len(header):
        raise ConfigurationError(
            f"table needs shape (n, {len(header)}), got {rows.shape}")
    _write_rows(path, list(header),
                [[format_float(v) for v in row] for row in rows])


def write_dataset_csv(path, dataset: Dataset) -> None:
    """Inputs and responses, one row per retained sample.

    Header: ``id,p_1..p_M,f_1..f_N`` (the response block is absent when the
    dataset carries none).
    """
    n_in = dataset.inputs.shape[1]
    header = ["id"] + [f"p_{j + 1}" for j in range(n_in)]
    out = dataset.outputs
    if out is not None:
        header += [f"f_{j + 1}" for j in range(out.shape[1])]
    rows = []
    for i in range(len(dataset)):
        row = [str(int(dataset.ids[i]))]
        row += [format_float(v) for v in dataset.inputs[i]]
        if out is not None:
            row += [format_float(v) for v in out[i]]
        rows.append(row)
    _write_rows(path, header, rows)


def read_dataset_csv(path) -> Dataset:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = list(reader)
    n_in = sum(1 for name in header if name.startswith("p_"))
    n_out = sum(1 for name in header if name.startswith("f_"))
    expected = (["id"] + [f"p_{j + 1}" for j in range(n_in)]
                + [f"f_{j + 1}" for j in range(n_out)])
    if header != expected:
        raise ConfigurationError(f"unrecognized dataset header {header!r}")
    ids = np.array([int(row[0]) for row in body], dtype=int)
    values = np.array([[float(v) for v in row[1:]] for row in body], dtype=float)
    values = values.reshape(len(body), n_in + n_out)
    inputs = values[:, :n_in]
    outputs = values[:, n_in:] if n_out else None
    return Dataset(inputs=inputs, outputs=outputs, ids=ids, manifest={})


def write_embedding_csv(path, spectrum: DiffusionSpectrum) -> None:
    """Embedding coordinates, header ``id,psi_0,...,psi_k``."""
    k = spectrum.n_components
    header = ["id"] + [f"psi_{j}" for j in range(k)]
    ids = spectrum.cloud.ids
    rows = [[str(int(ids[i]))] + [format_float(v) for v in spectrum.eigenvectors[i]]
            for i in range(spectrum.eigenvectors.shape[0])]
    _write_rows(path, header, rows)


def read_embedding_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        body = list(reader)
    k = len(header) - 1
    if header != ["id"] + [f"psi_{j}" for j in range(k)]:
        raise ConfigurationError(f"unrecognized embedding header {header!r}")
    ids = np.array([int(row[0]) for row in body], dtype=int)
    coords = np.array([[float(v) for v in row[1:]] for row in body], dtype=float)
    return ids, coords.reshape(len(body), k)


def write_spectrum_sidecar(path, spectrum: DiffusionSpectrum, extra=None) -> None:
    """Eigenvalues plus the kernel that produced them, as JSON."""
    spec = spectrum.spec
    meta = {
        "eigenvalues": [float(v) for v in spectrum.eigenvalues],
        "kernel": {
            "family": spec.family,
            "scale": float(spec.scale),
            "exponent": float(spec.exponent),
            "offset": None if spec.offset is None else float(spec.offset),
        },
        "n_points": int(spectrum.eigenvectors.shape[0]),
    }
    if extra:
        meta.update(extra)
    write_json(path, meta)


def write_curve_csv(path, curve: ResponseCurve) -> None:
    """Response curve, header ``phi,eta,arclength,u_center``."""
    header = ["phi", "eta", "arclength", "u_center"]
    rows = [[format_float(curve.phi[i]), format_float(curve.eta[i]),
             format_float(curve.arclength[i]), format_float(curve.u_center[i])]
            for i in range(len(curve.phi))]
    _write_rows(path, header, rows)


def read_curve_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["phi", "eta", "arclength", "u_center"]:
            raise ConfigurationError(f"unrecognized curve header {header!r}")
        body = list(reader)
    values = np.array([[float(v) for v in row] for row in body], dtype=float)
    values = values.reshape(len(body), 4)
    return values[:, 0], values[:, 1], values[:, 2], values[:, 3]


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def config_hash(config: dict) -> str:
    """Stable digest of a config dict; key order and platform do not matter."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
