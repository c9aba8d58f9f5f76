"""Experiment runner: configured dataset/embedding/analysis runs and the
replot pipelines, driven by JSON configs from the command line.

Exit codes: 0 success, 1 a stage failed after validation (partial artifacts
plus a manifest describing how far the run got), 2 the config itself did not
validate (nothing is written).
"""

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from . import analysis as an
from . import dmaps as dm
from . import figures
from . import io as eio
from .errors import ConfigurationError
from .models import ModelDefinition, ObservationProtocol, get_model
from .pellet import trace_curve
from .sampling import SamplerSpec, generate_dataset

__all__ = [
    "ExperimentConfig",
    "RunManifest",
    "load_config",
    "run_experiment",
    "run_figure",
    "main",
    "SCHEMA_VERSION",
    "ARTIFACT_VERSION",
    "OUTPUT_ROOT_ENV",
]

SCHEMA_VERSION = 1
ARTIFACT_VERSION = 1
OUTPUT_ROOT_ENV = "EFFPARAM_OUTPUT_ROOT"

_CONFIG_KEYS = {"schema", "model", "seed", "protocol", "sampler", "kernel",
                "analysis", "outdir", "pellet"}
_STEP_NAMES = {"independent-coordinates", "dependence", "harmonic", "histogram"}
_SERIES_PREFIXES = ("input:", "output:", "coord:")
_SERIES_NAMES = ("output-norm", "input-product")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated run description: model, sampling, kernel, analysis steps.

    Construction resolves every registry reference (model id, kernel
    family, axis kinds, analysis step names), so a config object in hand
    means the run can at least start.
    """

    model: ModelDefinition
    protocol: Optional[ObservationProtocol]
    sampler: SamplerSpec
    kernel: dict
    analysis: tuple
    seed: int
    outdir: Optional[str]
    raw: dict = field(repr=False, default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("config must be a JSON object")
        unknown = set(data) - _CONFIG_KEYS
        if unknown:
            raise ConfigurationError(f"unknown config keys {sorted(unknown)}")
        schema = data.get("schema", SCHEMA_VERSION)
        if schema != SCHEMA_VERSION:
            raise ConfigurationError(
                f"config schema {schema!r} not supported (this build reads "
                f"schema {SCHEMA_VERSION})")
        if "model" not in data:
            raise ConfigurationError("config needs a model id")
        model = get_model(data["model"])
        if "seed" not in data:
            raise ConfigurationError("config needs a seed (or pass --seed)")
        seed = data["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigurationError("seed must be an integer")

        protocol = None
        if "protocol" in data:
            p = data["protocol"]
            if not isinstance(p, dict) or "variable" not in p:
                raise ConfigurationError("protocol needs at least a variable name")
            protocol = ObservationProtocol(
                variable=p["variable"], times=tuple(p.get("times", ())),
                fixed=dict(p.get("fixed", {})))

        if "sampler" not in data or not isinstance(data["sampler"], dict):
            raise ConfigurationError("config needs a sampler object")
        samp = data["sampler"]
        axes = samp.get("axes")
        if not axes:
            raise ConfigurationError("sampler needs axes")
        count = samp.get("count", 100)
        sampler = SamplerSpec(axes=tuple(tuple(a) for a in axes),
                              count=tuple(count) if isinstance(count, list)
                              else count,
                              seed=seed)

        kernel = dict(data.get("kernel", {"family": "output-only"}))
        extra = set(kernel) - {"family", "scale", "multiplier", "components",
                               "exponent", "offset"}
        if extra:
            raise ConfigurationError(f"unknown kernel keys {sorted(extra)}")
        if "scale" in kernel and "multiplier" in kernel:
            raise ConfigurationError("give kernel scale or multiplier, not both")
        components = kernel.get("components", 8)
        if not isinstance(components, int) or components < 1:
            raise ConfigurationError("kernel components must be a positive integer")
        # probe construction checks family/exponent/offset ranges up front
        dm.KernelSpec(family=kernel.get("family", "output-only"),
                      scale=float(kernel.get("scale", 1.0)),
                      exponent=float(kernel.get("exponent", 4.0)),
                      offset=kernel.get("offset"))

        steps = data.get("analysis", [])
        if not isinstance(steps, list):
            raise ConfigurationError("analysis must be a list of steps")
        for step in steps:
            if not isinstance(step, dict) or step.get("step") not in _STEP_NAMES:
                raise ConfigurationError(
                    f"each analysis step needs a step name from "
                    f"{sorted(_STEP_NAMES)}")
            for key in ("target", "candidate", "base"):
                if key in step and isinstance(step[key], str):
                    _check_series_token(step[key])

        outdir = data.get("outdir")
        if outdir is not None and not isinstance(outdir, str):
            raise ConfigurationError("outdir must be a string path")
        return cls(model=model, protocol=protocol, sampler=sampler,
                   kernel=kernel, analysis=tuple(steps), seed=seed,
                   outdir=outdir, raw=dict(data))


@dataclass(frozen=True)
class RunManifest:
    """What one invocation did: identity, provenance, per-stage counts."""

    config_hash: str
    seed: int
    command: str
    stages: dict
    status: str
    created: str
    finished: str
    model: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "artifact_version": ARTIFACT_VERSION,
            "package_version": __version__,
            "config_hash": self.config_hash,
            "seed": self.seed,
            "command": self.command,
            "model": self.model,
            "status": self.status,
            "created": self.created,
            "finished": self.finished,
            "stages": self.stages,
        }


def _check_series_token(token: str) -> None:
    if token in _SERIES_NAMES:
        return
    for prefix in _SERIES_PREFIXES:
        if token.startswith(prefix):
            tail = token[len(prefix):]
            if tail.isdigit():
                return
            raise ConfigurationError(
                f"series token {token!r} needs an integer index")
    raise ConfigurationError(
        f"unknown series token {token!r}; use input:J, output:J, coord:J, "
        f"output-norm, or input-product")


def _resolve_series(token, dataset, spectrum) -> np.ndarray:
    if isinstance(token, int):
        return spectrum.coordinate(token)
    _check_series_token(token)
    if token == "output-norm":
        return np.linalg.norm(dataset.outputs, axis=1)
    if token == "input-product":
        return np.prod(dataset.inputs, axis=1)
    kind, _, idx = token.partition(":")
    j = int(idx)
    if kind == "input":
        return dataset.inputs[:, j]
    if kind == "output":
        return dataset.outputs[:, j]
    return spectrum.coordinate(j)


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def load_config(path, seed: Optional[int] = None,
                out: Optional[str] = None) -> ExperimentConfig:
    """Read a JSON config, apply flag overrides, validate."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ConfigurationError("config must be a JSON object")
    data = dict(data)
    if seed is not None:
        data["seed"] = seed
    if out is not None:
        data["outdir"] = out
    return ExperimentConfig.from_dict(data)


def _default_outdir(tag: str) -> Path:
    root = os.environ.get(OUTPUT_ROOT_ENV, ".")
    return Path(root) / tag


def _resolve_outdir(cfg_outdir: Optional[str], tag: str) -> Path:
    outdir = Path(cfg_outdir) if cfg_outdir else _default_outdir(tag)
    outdir.mkdir(parents=True, exist_ok=True)
    return outdir


def _build_kernel_spec(cfg: ExperimentConfig, cloud) -> dm.KernelSpec:
    kernel = cfg.kernel
    family = kernel.get("family", "output-only")
    exponent = float(kernel.get("exponent", 4.0))
    offset = kernel.get("offset")
    if "scale" in kernel:
        scale = float(kernel["scale"])
    else:
        probe = dm.KernelSpec(family=family, scale=1.0, exponent=exponent,
                              offset=offset)
        d2 = dm.pairwise_dissimilarity(cloud, probe)
        if family == "mixed":
            d2 = d2[0]
        scale = dm.select_scale(distances=d2,
                                multiplier=float(kernel.get("multiplier", 1.0)))
    return dm.KernelSpec(family=family, scale=scale, exponent=exponent,
                         offset=offset)


def _run_step(step: dict, dataset, spectrum) -> dict:
    name = step["step"]
    if name == "independent-coordinates":
        sel = dm.select_independent_coordinates(
            spectrum, count=int(step.get("count", 2)),
            threshold=float(step.get("threshold", 0.2)),
            max_candidates=step.get("max_candidates"))
        return {"step": name, "indices": [int(i) for i in sel.indices],
                "scores": {str(k): float(v) for k, v in sel.scores.items()},
                "complete": bool(sel.complete)}
    if name == "dependence":
        coord = spectrum.coordinate(int(step.get("coordinate", 1)))
        target = _resolve_series(step.get("target", "input:0"), dataset, spectrum)
        method = step.get("method", "spearman")
        score = an.dependence_score(target, coord, method=method)
        return {"step": name, "coordinate": int(step.get("coordinate", 1)),
                "target": step.get("target", "input:0"), "method": method,
                "score": float(score.score), "count": int(score.count)}
    if name == "harmonic":
        cand = _resolve_series(step.get("candidate", 2), dataset, spectrum)
        base = _resolve_series(step.get("base", 1), dataset, spectrum)
        residual = an.harmonic_test(cand, base)
        return {"step": name, "candidate": step.get("candidate", 2),
                "base": step.get("base", 1), "residual": float(residual)}
    if name == "histogram":
        values = _resolve_series(step.get("target", "output:0"), dataset, spectrum)
        hist = an.output_histogram(values, int(step.get("bins", 20)))
        return {"step": name, "target": step.get("target", "output:0"),
                "density": [float(v) for v in hist.density],
                "edges": [float(v) for v in hist.edges]}
    raise ConfigurationError(f"unknown analysis step {name!r}")


def _execute(cfg: ExperimentConfig, outdir: Path, upto: str, command: str) -> int:
    """Run stages in order up to ``upto``, recording each in the manifest."""
    created = _now()
    stages = {}
    chash = eio.config_hash(cfg.raw)

    def write_manifest(status: str) -> None:
        manifest = RunManifest(config_hash=chash, seed=cfg.seed,
                               command=command, stages=stages, status=status,
                               created=created, finished=_now(),
                               model=cfg.model.model_id)
        eio.write_json(outdir / "manifest.json", manifest.to_dict())

    def fail(stage: str, exc: Exception) -> int:
        stages[stage] = {"status": "failed", "rows": 0, "failures": 1,
                         "error": f"{type(exc).__name__}: {exc}"}
        write_manifest("failed")
        print(f"effparam: {stage} stage failed: {exc}", file=sys.stderr)
        return 1

    try:
        dataset = generate_dataset(cfg.model, cfg.protocol, cfg.sampler)
        eio.write_dataset_csv(outdir / "dataset.csv", dataset)
        eio.write_json(outdir / "dataset.json", dataset.manifest)
        stages["generate"] = {"status": "ok", "rows": len(dataset),
                              "failures": int(dataset.manifest["failures"])}
    except Exception as exc:
        return fail("generate", exc)
    if upto == "generate":
        write_manifest("ok")
        return 0

    try:
        cloud = dataset.cloud
        spec = _build_kernel_spec(cfg, cloud)
        spectrum = dm.compute_spectrum(cloud, spec,
                                       k=int(cfg.kernel.get("components", 8)))
        eio.write_embedding_csv(outdir / "embedding.csv", spectrum)
        eio.write_spectrum_sidecar(outdir / "spectrum.json", spectrum)
        stages["embed"] = {"status": "ok",
                           "rows": int(spectrum.eigenvectors.shape[0]),
                           "failures": 0}
    except Exception as exc:
        return fail("embed", exc)
    if upto == "embed":
        write_manifest("ok")
        return 0

    verdicts = []
    try:
        for step in cfg.analysis:
            verdicts.append(_run_step(step, dataset, spectrum))
        eio.write_json(outdir / "verdicts.json", verdicts)
        stages["analyze"] = {"status": "ok", "rows": len(verdicts),
                             "failures": 0}
    except Exception as exc:
        eio.write_json(outdir / "verdicts.json", verdicts)
        return fail("analyze", exc)

    write_manifest("ok")
    return 0


def run_experiment(config_path, seed: Optional[int] = None,
                   out: Optional[str] = None, upto: str = "analyze",
                   command: str = "analyze") -> int:
    """Full configured run: generate, embed, analyze; artifacts on disk.

    Validation problems exit 2 before anything is written; stage failures
    exit 1 leaving the artifacts of completed stages plus the manifest.
    """
    try:
        cfg = load_config(config_path, seed=seed, out=out)
        tag = f"{cfg.model.model_id}-{eio.config_hash(cfg.raw)[:12]}"
        outdir = _resolve_outdir(cfg.outdir, tag)
    except (ConfigurationError, OSError) as exc:
        print(f"effparam: invalid run: {exc}", file=sys.stderr)
        return 2
    return _execute(cfg, outdir, upto, command)


def _validate_pellet_section(data: dict) -> dict:
    pellet = data.get("pellet")
    if not isinstance(pellet, dict):
        raise ConfigurationError("pellet config needs a pellet object")
    unknown = set(pellet) - {"beta", "gamma", "phi_lo", "phi_hi", "points"}
    if unknown:
        raise ConfigurationError(f"unknown pellet keys {sorted(unknown)}")
    try:
        beta = float(pellet.get("beta", 0.2))
        gamma = float(pellet.get("gamma", 20.0))
        lo = float(pellet.get("phi_lo", 0.9))
        hi = float(pellet.get("phi_hi", 10.0))
        points = int(pellet.get("points", 121))
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"pellet values must be numeric: {exc}")
    if not (lo > 0 and hi > lo):
        raise ConfigurationError("pellet grid needs 0 < phi_lo < phi_hi")
    if points < 2:
        raise ConfigurationError("pellet grid needs at least 2 points")
    return {"beta": beta, "gamma": gamma, "lo": lo, "hi": hi, "points": points}


def run_pellet(config_path, seed: Optional[int] = None,
               out: Optional[str] = None) -> int:
    """Trace one response curve onto disk as ``curve.csv``."""
    try:
        if config_path is None:
            data = {}
        else:
            with open(config_path) as fh:
                data = json.load(fh)
            if not isinstance(data, dict):
                raise ConfigurationError("config must be a JSON object")
        data.setdefault("pellet", {})
        params = _validate_pellet_section(data)
        outdir = _resolve_outdir(out or data.get("outdir"), "pellet")
    except (ConfigurationError, OSError, json.JSONDecodeError) as exc:
        print(f"effparam: invalid run: {exc}", file=sys.stderr)
        return 2

    created = _now()
    chash = eio.config_hash(params)
    stages = {}

    def write_manifest(status):
        manifest = RunManifest(config_hash=chash, seed=seed if seed is not None
                               else 0, command="pellet", stages=stages,
                               status=status, created=created, finished=_now())
        eio.write_json(outdir / "manifest.json", manifest.to_dict())

    try:
        grid = np.logspace(np.log10(params["lo"]), np.log10(params["hi"]),
                           params["points"])
        curve = trace_curve(params["beta"], params["gamma"], grid)
        eio.write_curve_csv(outdir / "curve.csv", curve)
        stages["trace"] = {"status": "ok", "rows": int(len(curve.phi)),
                           "failures": 0}
    except Exception as exc:
        stages["trace"] = {"status": "failed", "rows": 0, "failures": 1,
                           "error": f"{type(exc).__name__}: {exc}"}
        write_manifest("failed")
        print(f"effparam: trace stage failed: {exc}", file=sys.stderr)
        return 1
    write_manifest("ok")
    return 0


def run_figure(figure_id: str, seed: Optional[int] = None,
               out: Optional[str] = None) -> int:
    """Recompute one figure's plot data and write its CSV tables."""
    if figure_id not in figures.FIGURES:
        print(f"effparam: unknown figure id {figure_id!r}; known: "
              f"{', '.join(sorted(figures.FIGURES))}", file=sys.stderr)
        return 2
    try:
        outdir = _resolve_outdir(out, str(Path("figures") / figure_id))
    except OSError as exc:
        print(f"effparam: invalid run: {exc}", file=sys.stderr)
        return 2

    created = _now()
    stages = {}
    chash = eio.config_hash({"figure": figure_id, "seed": seed})

    def write_manifest(status):
        manifest = RunManifest(config_hash=chash,
                               seed=seed if seed is not None else 0,
                               command=f"figure {figure_id}", stages=stages,
                               status=status, created=created, finished=_now())
        eio.write_json(outdir / "manifest.json", manifest.to_dict())

    try:
        tables = figures.FIGURES[figure_id](seed=seed)
        for name, (header, rows) in tables.items():
            eio.write_table(outdir / f"{name}.csv", header, rows)
            stages[name] = {"status": "ok", "rows": int(len(rows)),
                            "failures": 0}
    except Exception as exc:
        stages["pipeline"] = {"status": "failed", "rows": 0, "failures": 1,
                              "error": f"{type(exc).__name__}: {exc}"}
        write_manifest("failed")
        print(f"effparam: figure {figure_id} failed: {exc}", file=sys.stderr)
        return 1
    write_manifest("ok")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="effparam",
        description="Effective-parameter discovery runs and plot-data export.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="JSON config path")
        p.add_argument("--seed", type=int, default=None,
                       help="override the config seed")
        p.add_argument("--out", default=None,
                       help="output directory (default: config outdir, else "
                            f"${OUTPUT_ROOT_ENV})")

    add_common(sub.add_parser("generate", help="sample inputs and evaluate "
                                               "the model"))
    add_common(sub.add_parser("embed", help="generate, then compute the "
                                            "diffusion embedding"))
    add_common(sub.add_parser("analyze", help="full run: generate, embed, "
                                              "and analysis verdicts"))
    add_common(sub.add_parser("pellet", help="trace a reaction-diffusion "
                                             "response curve"),
               config_required=False)
    fig = sub.add_parser("figure", help="recompute plot data for one figure")
    fig.add_argument("id", help="figure id, e.g. fig1, rect, svals")
    add_common(fig, config_required=False)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command in ("generate", "embed", "analyze"):
        return run_experiment(args.config, seed=args.seed, out=args.out,
                              upto=args.command, command=args.command)
    if args.command == "pellet":
        return run_pellet(args.config, seed=args.seed, out=args.out)
    if args.command == "figure":
        return run_figure(args.id, seed=args.seed, out=args.out)
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
