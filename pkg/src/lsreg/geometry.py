"""Total variation of material fields and the regularized curvature term."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, divergence, gradient
from .projection import ProjectionParams, project_smooth, project_smooth_derivative


@dataclass(frozen=True)
class CurvatureParams:
    """``beta`` weights the BV term in the functional; ``beta_alpha`` is the
    product that multiplies the curvature in the velocity equation."""

    h: float = 1e-3
    beta: float = 0.0
    beta_alpha: float = 0.0

    def __post_init__(self) -> None:
        for name in ("h", "beta", "beta_alpha"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be non-negative")


def bv_seminorm(grid: Grid, z: np.ndarray) -> float:
    """Isotropic total variation from forward differences.

    Each cell contributes ``|(dx, dy)| * spacing**2`` with both differences
    taken from its lower-left node. Diagonal edges are overestimated (up to
    a factor sqrt(2) for a staircase); axis-aligned edges come out exact.
    """
    h = grid.spacing
    dx = (z[1:, :-1] - z[:-1, :-1]) / h
    dy = (z[:-1, 1:] - z[:-1, :-1]) / h
    return float(np.sum(np.sqrt(dx**2 + dy**2)) * h * h)


def curvature_term(grid: Grid, phi: np.ndarray, proj: ProjectionParams) -> np.ndarray:
    """``div(grad z / sqrt(|grad z|^2 + h^2))`` for ``z = P_eps(phi)``.

    The sign follows the formula as written: for a disk where ``phi`` is
    positive inside, the value on the ramp band is about ``-1/radius``.
    """
    if not proj.h > 0:
        raise ValueError("curvature term needs a positive gradient floor h")
    z = project_smooth(phi, proj)
    gx, gy = gradient(grid, z)
    norm = np.sqrt(gx**2 + gy**2 + proj.h**2)
    return divergence(grid, gx / norm, gy / norm)


def velocity_rhs(
    grid: Grid,
    phi: np.ndarray,
    v: np.ndarray,
    proj: ProjectionParams,
    cur: CurvatureParams,
    curvature_sign: float = 1.0,
) -> np.ndarray:
    """Right-hand side of the smoothing equation for the velocity.

    ``-P'(phi) v + beta_alpha P'(phi) curvature``. ``curvature_sign`` flips
    the curvature contribution and exists only for debugging the orientation.
    """
    if np.shape(phi) != grid.shape or np.shape(v) != grid.shape:
        raise ValueError("phi and v must live on the same grid")
    dp = project_smooth_derivative(phi, proj)
    rhs = -dp * v
    if cur.beta_alpha > 0:
        rhs = rhs + curvature_sign * cur.beta_alpha * dp * curvature_term(grid, phi, proj)
    return rhs
