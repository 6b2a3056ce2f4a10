"""Projections from level set functions to material fields."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .grid import Grid

EXP_LIMIT = 700.0


@dataclass(frozen=True)
class ProjectionParams:
    """Ramp width ``epsilon`` of the smoothed projection and the gradient
    floor ``h`` used by the curvature term."""

    epsilon: float = 0.125
    h: float = 1e-3

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if not self.h >= 0:
            raise ValueError(f"h must be non-negative, got {self.h}")


def project_sharp(phi: np.ndarray) -> np.ndarray:
    """Indicator of ``phi >= 0``."""
    return (np.asarray(phi) >= 0).astype(float)


def project_smooth(phi: np.ndarray, params: ProjectionParams) -> np.ndarray:
    """Piecewise-linear ramp: 0 below ``-epsilon``, 1 above 0, linear between."""
    return np.clip(1.0 + np.asarray(phi, dtype=float) / params.epsilon, 0.0, 1.0)


def project_smooth_derivative(phi: np.ndarray, params: ProjectionParams) -> np.ndarray:
    """Derivative of :func:`project_smooth`.

    Both kinks belong to the ramp, so the value is ``1/epsilon`` on the closed
    interval ``[-epsilon, 0]``.
    """
    phi = np.asarray(phi, dtype=float)
    band = (phi >= -params.epsilon) & (phi <= 0.0)
    return np.where(band, 1.0 / params.epsilon, 0.0)


def project_clamp(phi: np.ndarray, a: float) -> np.ndarray:
    """Clamp to ``[-a, a]``; keeps reconstructions bounded by ``a``."""
    if not a > 0:
        raise ValueError(f"clamp bound must be positive, got {a}")
    return np.clip(np.asarray(phi, dtype=float), -a, a)


def project_exp(phi: np.ndarray) -> np.ndarray:
    """Pointwise exponential; yields strictly positive fields."""
    phi = np.asarray(phi, dtype=float)
    if np.any(phi > EXP_LIMIT) or not np.all(np.isfinite(phi)):
        raise ValueError(f"exponential projection needs finite values <= {EXP_LIMIT}")
    return np.exp(phi)


def signed_distance_init(
    grid: Grid, shape: Callable[[np.ndarray, np.ndarray], np.ndarray], chunk: int = 1024
) -> np.ndarray:
    """Level set function ``dist(., complement) - dist(., A)`` on the nodes.

    ``shape(X, Y)`` returns a boolean mask of the region A. Distances are to
    the nearest node of the respective set, found by exhaustive search. If A
    is empty or covers every node the result is the constant ``-/+ sqrt(2)``.
    """
    X, Y = grid.meshgrid()
    inside = np.asarray(shape(X, Y), dtype=bool)
    if not inside.any():
        return np.full(grid.shape, -np.sqrt(2.0))
    if inside.all():
        return np.full(grid.shape, np.sqrt(2.0))
    pts = np.column_stack([X.ravel(), Y.ravel()])
    flat = inside.ravel()
    phi = np.empty(grid.num_nodes)
    for target, sign in ((pts[~flat], 1.0), (pts[flat], -1.0)):
        # nodes of A measure distance to the complement and vice versa
        sources = flat if sign > 0 else ~flat
        idx = np.flatnonzero(sources)
        for start in range(0, idx.size, chunk):
            sel = idx[start : start + chunk]
            d2 = ((pts[sel, None, :] - target[None, :, :]) ** 2).sum(axis=-1)
            phi[sel] = sign * np.sqrt(d2.min(axis=1))
    return phi.reshape(grid.shape)
