"""Level set evolution: functional evaluation, the explicit update and the
outer loop with iterated regularization.

One update solves three elliptic problems:

1. potential ``u`` with ``Laplace(u) = P_eps(phi)``, residual
   ``r = dU/dnu - data``;
2. harmonic extension ``v`` of ``r``;
3. velocity ``w`` with ``(I - Laplace) w = -P'_eps(phi) v + beta*alpha
   P'_eps(phi) curvature``, ``dw/dnu = 0``;

and then sets ``phi <- anchor + w / alpha``. With the anchor equal to the
current iterate this is one explicit Euler step of the evolution with time
step ``1/alpha``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .elliptic import forward, solve_helmholtz_neumann, solve_laplace_dirichlet
from .geometry import CurvatureParams, bv_seminorm, velocity_rhs
from .grid import Grid, gradient
from .projection import ProjectionParams, project_smooth

logger = logging.getLogger(__name__)

DIVERGENCE_BOUND = 1e3
COMPONENT_THRESHOLD = 0.5


@dataclass(frozen=True)
class ReconstructionConfig:
    """Parameters of a reconstruction.

    ``alpha`` is both the regularization weight and the inverse time step.
    ``anchor`` selects iterated regularization (``"iterated"``: each step is
    anchored at the previous iterate) or plain Tikhonov (``"fixed"``: every
    step is anchored at the initial guess).
    """

    alpha: float = 1.0
    beta: float = 0.0
    epsilon: float = 0.125
    h: float = 1e-3
    max_iterations: int = 3000
    inner_fixed_point_steps: int = 1
    stop_residual: float | None = None
    seed: int = 0
    anchor: str = "iterated"
    curvature_sign: float = 1.0
    solver: str = "direct"

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if not self.epsilon > 0 or not self.h > 0:
            raise ValueError("epsilon and h must be positive")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.inner_fixed_point_steps < 1:
            raise ValueError("inner_fixed_point_steps must be at least 1")
        if self.anchor not in ("iterated", "fixed"):
            raise ValueError(f"anchor must be 'iterated' or 'fixed', got {self.anchor!r}")
        if self.solver not in ("direct", "cg"):
            raise ValueError(f"solver must be 'direct' or 'cg', got {self.solver!r}")

    @property
    def beta_alpha(self) -> float:
        return self.beta * self.alpha

    @property
    def projection(self) -> ProjectionParams:
        return ProjectionParams(self.epsilon, self.h)

    @property
    def curvature(self) -> CurvatureParams:
        return CurvatureParams(self.h, self.beta, self.beta_alpha)

    def with_beta_alpha(self, beta_alpha: float) -> "ReconstructionConfig":
        return replace(self, beta=beta_alpha / self.alpha)


@dataclass(frozen=True)
class IterationRecord:
    index: int
    residual_sq: float
    bv_value: float
    penalty: float
    functional: float
    component_count: int


class DivergenceError(RuntimeError):
    """The level set function blew up or became non-finite."""

    def __init__(self, message: str, record: IterationRecord | None = None):
        super().__init__(message)
        self.record = record
        self.history: list[IterationRecord] = []


@dataclass
class RunResult:
    phi: np.ndarray
    records: list[IterationRecord]
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    error: DivergenceError | None = None


def h1_norm_sq(grid: Grid, f: np.ndarray) -> float:
    """Trapezoid L2 norm of ``f`` plus that of its centered gradient."""
    gx, gy = gradient(grid, f)
    return grid.integrate(f * f) + grid.integrate(gx * gx + gy * gy)


def component_count(z: np.ndarray, threshold: float = COMPONENT_THRESHOLD) -> int:
    """Number of 4-connected components of ``{z >= threshold}``."""
    _, count = ndimage.label(np.asarray(z) >= threshold)
    return int(count)


def evaluate_functional(
    grid: Grid,
    phi: np.ndarray,
    phi0: np.ndarray,
    data: np.ndarray,
    cfg: ReconstructionConfig,
    index: int = 0,
    trace: np.ndarray | None = None,
) -> IterationRecord:
    """Evaluate every term of the stabilized functional at ``phi``.

    ``trace`` may carry a precomputed ``forward(P_eps(phi))``.
    """
    z = project_smooth(phi, cfg.projection)
    if trace is None:
        trace = forward(grid, z, cfg.solver)
    residual_sq = grid.boundary_inner(trace - data, trace - data)
    bv = bv_seminorm(grid, z)
    penalty = h1_norm_sq(grid, phi - phi0)
    functional = residual_sq + 2.0 * cfg.beta * cfg.alpha * bv + cfg.alpha * penalty
    return IterationRecord(index, residual_sq, bv, penalty, functional, component_count(z))


def velocity(
    grid: Grid, phi: np.ndarray, data: np.ndarray, cfg: ReconstructionConfig, trace: np.ndarray | None = None
) -> np.ndarray:
    """Steps 1-3 of the update: the smoothed velocity ``w`` at ``phi``."""
    proj = cfg.projection
    if trace is None:
        trace = forward(grid, project_smooth(phi, proj), cfg.solver)
    v = solve_laplace_dirichlet(grid, trace - data, cfg.solver)
    rhs = velocity_rhs(grid, phi, v, proj, cfg.curvature, cfg.curvature_sign)
    return solve_helmholtz_neumann(grid, rhs, cfg.solver)


def _guard(phi: np.ndarray, record: IterationRecord | None = None) -> None:
    if not np.all(np.isfinite(phi)):
        raise DivergenceError("level set function became non-finite", record)
    peak = float(np.max(np.abs(phi)))
    if peak > DIVERGENCE_BOUND:
        raise DivergenceError(f"max |phi| = {peak:.3e} exceeds {DIVERGENCE_BOUND:g}", record)


def fixed_point_iterates(
    grid: Grid,
    phi_k: np.ndarray,
    phi_anchor: np.ndarray,
    data: np.ndarray,
    cfg: ReconstructionConfig,
    trace: np.ndarray | None = None,
) -> list[np.ndarray]:
    """Inner iterates ``phi^(0) = phi_k``, ``phi^(j+1) = anchor + w(phi^(j)) / alpha``.

    Returns all ``inner_fixed_point_steps + 1`` iterates. ``trace`` may carry
    ``forward(P_eps(phi_k))`` to save one solve.
    """
    iterates = [phi_k]
    current = phi_k
    for j in range(cfg.inner_fixed_point_steps):
        w = velocity(grid, current, data, cfg, trace if j == 0 else None)
        current = phi_anchor + w / cfg.alpha
        _guard(current)
        iterates.append(current)
    return iterates


def step(
    grid: Grid,
    phi_k: np.ndarray,
    phi_anchor: np.ndarray,
    data: np.ndarray,
    cfg: ReconstructionConfig,
    trace: np.ndarray | None = None,
) -> np.ndarray:
    """One outer update; see :func:`fixed_point_iterates`."""
    return fixed_point_iterates(grid, phi_k, phi_anchor, data, cfg, trace)[-1]


def run(
    grid: Grid,
    initial: np.ndarray,
    data: np.ndarray,
    cfg: ReconstructionConfig,
    snapshot_schedule: list[int] | tuple[int, ...] = (),
    callback=None,
) -> RunResult:
    """Evolve ``initial`` for up to ``cfg.max_iterations`` steps.

    Record ``k`` (1-based) describes ``phi_k``; its penalty is measured
    against the anchor of the step that produced it. Snapshots hold
    ``P_eps(phi_k)`` for every scheduled ``k`` that is reached (``k = 0`` is
    the initial field). A divergence ends the run early; the partial history
    is returned with ``error`` set.
    """
    schedule = list(snapshot_schedule)
    if schedule != sorted(schedule):
        raise ValueError("snapshot schedule must be sorted ascending")
    wanted = set(schedule)
    proj = cfg.projection
    phi = np.array(initial, dtype=float)
    records: list[IterationRecord] = []
    snapshots: dict[int, np.ndarray] = {}
    if 0 in wanted:
        snapshots[0] = project_smooth(phi, proj)
    trace = None
    for k in range(1, cfg.max_iterations + 1):
        anchor = phi if cfg.anchor == "iterated" else initial
        try:
            new_phi = step(grid, phi, anchor, data, cfg, trace)
        except DivergenceError as exc:
            exc.record = records[-1] if records else None
            exc.history = list(records)
            logger.warning("run diverged at step %d: %s", k, exc)
            return RunResult(phi, records, snapshots, exc)
        phi = new_phi
        trace = forward(grid, project_smooth(phi, proj), cfg.solver)
        rec = evaluate_functional(grid, phi, anchor, data, cfg, index=k, trace=trace)
        records.append(rec)
        if k in wanted:
            snapshots[k] = project_smooth(phi, proj)
        if callback is not None:
            callback(rec, phi)
        if cfg.stop_residual is not None and rec.residual_sq <= cfg.stop_residual:
            logger.info("residual target reached at step %d", k)
            break
    return RunResult(phi, records, snapshots)


def fit_to_data_beta_alpha(grid: Grid, noise_level: float, data: np.ndarray, probe: IterationRecord) -> float:
    """beta*alpha such that ``2 beta alpha |z|_BV`` matches the squared
    noise scale ``(noise_level * ||data||)**2``."""
    if noise_level < 0:
        raise ValueError("noise level must be non-negative")
    if noise_level == 0:
        return 0.0
    if not probe.bv_value > 0:
        raise ValueError("fit-to-data needs a probe with positive total variation")
    return (noise_level * grid.boundary_norm(data)) ** 2 / (2.0 * probe.bv_value)
