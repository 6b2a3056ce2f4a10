"""Experiment specification, synthetic data and the artifact-producing run."""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import tomli
import tomli_w

from ..elliptic import SolverError, forward
from ..grid import Grid
from ..inversion import (
    ReconstructionConfig,
    RunResult,
    component_count,
    evaluate_functional,
    fit_to_data_beta_alpha,
    run,
)
from ..projection import project_smooth, signed_distance_init
from . import io
from .shapes import Region

logger = logging.getLogger(__name__)

DEFAULT_SCHEDULE = (0, 1, 2, 10, 100, 200, 300, 400, 500, 600, 700, 800, 900, 1000, 2000, 3000)


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce one reconstruction.

    ``beta_rule`` is ``"fixed"`` (use ``reconstruction.beta`` as given) or
    ``"fit"`` (fit-to-data choice of beta*alpha, multiplied by
    ``beta_scale``).
    """

    name: str
    target: Region
    initial: Region
    forward_grid_n: int = 129
    inversion_grid_n: int = 65
    noise_level: float = 0.0
    seed: int = 0
    reconstruction: ReconstructionConfig = field(default_factory=ReconstructionConfig)
    beta_rule: str = "fixed"
    beta_scale: float = 1.0
    snapshot_schedule: tuple[int, ...] = DEFAULT_SCHEDULE
    output_dir: str = "out"

    def __post_init__(self) -> None:
        nf, nc = self.forward_grid_n, self.inversion_grid_n
        if nc < 3 or nf < 2 * nc - 1 or (nf - 1) % (nc - 1):
            raise ValueError(
                f"forward grid n={nf} must refine inversion grid n={nc} by an integer factor >= 2"
            )
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValueError(f"noise level must lie in [0, 1], got {self.noise_level}")
        if self.beta_rule not in ("fixed", "fit"):
            raise ValueError(f"beta_rule must be 'fixed' or 'fit', got {self.beta_rule!r}")
        if list(self.snapshot_schedule) != sorted(self.snapshot_schedule):
            raise ValueError("snapshot schedule must be sorted ascending")

    @property
    def refinement(self) -> int:
        return (self.forward_grid_n - 1) // (self.inversion_grid_n - 1)

    def inversion_grid(self) -> Grid:
        return Grid(self.inversion_grid_n)

    def forward_grid(self) -> Grid:
        return Grid(self.forward_grid_n)

    def to_dict(self) -> dict:
        rec = {k: v for k, v in asdict(self.reconstruction).items() if v is not None}
        rec["beta_rule"] = self.beta_rule
        rec["beta_scale"] = self.beta_scale
        return {
            "name": self.name,
            "forward_grid_n": self.forward_grid_n,
            "inversion_grid_n": self.inversion_grid_n,
            "noise_level": self.noise_level,
            "seed": self.seed,
            "snapshot_schedule": list(self.snapshot_schedule),
            "output_dir": self.output_dir,
            "target": self.target.to_list(),
            "initial": self.initial.to_list(),
            "reconstruction": rec,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        rec = dict(d.pop("reconstruction", {}))
        beta_rule = rec.pop("beta_rule", "fixed")
        beta_scale = float(rec.pop("beta_scale", 1.0))
        known = {f.name for f in fields(ReconstructionConfig)}
        unknown = set(rec) - known
        if unknown:
            raise ValueError(f"unknown reconstruction keys: {sorted(unknown)}")
        top_known = {f.name for f in fields(cls)}
        unknown = set(d) - top_known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        return cls(
            name=d.get("name", "experiment"),
            target=Region.from_list(d.get("target")),
            initial=Region.from_list(d.get("initial")),
            forward_grid_n=int(d.get("forward_grid_n", 129)),
            inversion_grid_n=int(d.get("inversion_grid_n", 65)),
            noise_level=float(d.get("noise_level", 0.0)),
            seed=int(d.get("seed", 0)),
            reconstruction=ReconstructionConfig(**rec),
            beta_rule=beta_rule,
            beta_scale=beta_scale,
            snapshot_schedule=tuple(int(k) for k in d.get("snapshot_schedule", DEFAULT_SCHEDULE)),
            output_dir=str(d.get("output_dir", "out")),
        )

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())

    @classmethod
    def from_toml(cls, text: str) -> "ExperimentSpec":
        return cls.from_dict(tomli.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentSpec":
        return cls.from_toml(Path(path).read_text())

    def with_overrides(self, **kw) -> "ExperimentSpec":
        rec_keys = {f.name for f in fields(ReconstructionConfig)}
        rec = {k: kw.pop(k) for k in list(kw) if k in rec_keys}
        spec = replace(self, **kw)
        if rec:
            spec = replace(spec, reconstruction=replace(spec.reconstruction, **rec))
        return spec


def generate_data(spec: ExperimentSpec) -> np.ndarray:
    """Exact boundary data for the target, computed on the forward grid and
    restricted to the boundary nodes of the inversion grid."""
    fine = spec.forward_grid()
    z = spec.target.coverage(fine)
    trace = forward(fine, z)
    return trace[:: spec.refinement].copy()


def add_noise(trace: np.ndarray, level: float, seed: int) -> np.ndarray:
    """Uniform white noise scaled so that ``max|noisy - trace| = level * max|trace|``."""
    if level < 0:
        raise ValueError(f"noise level must be non-negative, got {level}")
    trace = np.asarray(trace, dtype=float)
    if level == 0:
        return trace.copy()
    rng = np.random.default_rng(seed)
    u = rng.uniform(-1.0, 1.0, size=trace.shape)
    peak = np.max(np.abs(u))
    if peak == 0.0:
        return trace.copy()
    return trace + level * np.max(np.abs(trace)) * (u / peak)


def true_support(spec: ExperimentSpec, grid: Grid | None = None) -> np.ndarray:
    grid = grid or spec.inversion_grid()
    return spec.target.coverage(grid) >= 0.5


def symmetric_difference(grid: Grid, z: np.ndarray, truth: np.ndarray) -> float:
    """Area of ``{z >= 1/2}`` xor ``truth``, relative to the area of ``truth``."""
    mask = (z >= 0.5) != truth
    return grid.integrate(mask.astype(float)) / grid.integrate(truth.astype(float))


def support_difference(grid: Grid, za: np.ndarray, zb: np.ndarray, truth: np.ndarray) -> float:
    """Area of ``{za >= 1/2}`` xor ``{zb >= 1/2}`` relative to the area of ``truth``."""
    mask = (za >= 0.5) != (zb >= 0.5)
    return grid.integrate(mask.astype(float)) / grid.integrate(truth.astype(float))


def initial_level_set(spec: ExperimentSpec, grid: Grid | None = None) -> np.ndarray:
    return signed_distance_init(grid or spec.inversion_grid(), spec.initial.contains)


def resolve_beta(spec: ExperimentSpec, grid: Grid, phi0: np.ndarray, data: np.ndarray) -> ReconstructionConfig:
    cfg = spec.reconstruction
    if spec.beta_rule == "fixed":
        return cfg
    probe = evaluate_functional(grid, phi0, phi0, data, cfg)
    beta_alpha = fit_to_data_beta_alpha(grid, spec.noise_level, data, probe) * spec.beta_scale
    return cfg.with_beta_alpha(beta_alpha)


@dataclass
class ExperimentOutcome:
    status: int
    result: RunResult | None
    summary: dict


def run_experiment(
    spec: ExperimentSpec,
    output_dir: str | Path | None = None,
    data_noisy: np.ndarray | None = None,
) -> ExperimentOutcome:
    """Generate data (unless given), reconstruct and write every artifact.

    Returns status 0 on success, 1 on divergence or solver failure, and 3 on
    I/O failure; partial artifacts are kept on divergence.
    """
    out = Path(output_dir or spec.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        logger.error("cannot create %s: %s", out, exc)
        return ExperimentOutcome(3, None, {"status": "io-error", "message": str(exc)})

    grid = spec.inversion_grid()
    try:
        if data_noisy is None:
            clean = generate_data(spec)
            data_noisy = add_noise(clean, spec.noise_level, spec.seed)
        else:
            clean = None
        phi0 = initial_level_set(spec, grid)
        cfg = resolve_beta(spec, grid, phi0, data_noisy)
    except SolverError as exc:
        logger.error("data generation failed: %s", exc)
        return ExperimentOutcome(1, None, {"status": "solver-failure", "message": str(exc)})

    resolved = replace(spec, reconstruction=cfg, beta_rule="fixed", beta_scale=1.0, output_dir=str(out))
    try:
        (out / "spec.resolved.toml").write_text(resolved.to_toml())
        if clean is not None:
            io.write_trace(out / "data.csv", grid, clean)
        io.write_trace(out / "data_noisy.csv", grid, data_noisy)
    except OSError as exc:
        logger.error("cannot write artifacts: %s", exc)
        return ExperimentOutcome(3, None, {"status": "io-error", "message": str(exc)})

    try:
        result = run(grid, phi0, data_noisy, cfg, spec.snapshot_schedule)
    except SolverError as exc:
        logger.error("solver failure: %s", exc)
        return ExperimentOutcome(1, None, {"status": "solver-failure", "message": str(exc)})

    z_final = project_smooth(result.phi, cfg.projection)
    truth = true_support(spec, grid)
    counts = [r.component_count for r in result.records]
    summary = {
        "name": spec.name,
        "status": "diverged" if result.error else "ok",
        "iterations": len(result.records),
        "beta_alpha": cfg.beta_alpha,
        "initial_component_count": component_count(project_smooth(phi0, cfg.projection)),
        "final_component_count": counts[-1] if counts else None,
        "first_two_components": next((r.index for r in result.records if r.component_count == 2), None),
        "final_residual_sq": result.records[-1].residual_sq if result.records else None,
        "symmetric_difference": symmetric_difference(grid, z_final, truth),
    }
    if result.error:
        summary["message"] = str(result.error)
    try:
        io.write_records(out / "records.csv", result.records)
        for k, z in sorted(result.snapshots.items()):
            io.write_pgm(out / f"snapshot_{k}.pgm", z)
        (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    except OSError as exc:
        logger.error("cannot write artifacts: %s", exc)
        return ExperimentOutcome(3, result, summary)
    return ExperimentOutcome(1 if result.error else 0, result, summary)
