"""Bundled experiments.

Targets are explicit rectangle unions. Data come from a grid refined by a
factor of two, so every preset stays clear of the inverse crime.
"""

from __future__ import annotations

from ..inversion import ReconstructionConfig
from .experiment import ExperimentSpec
from .shapes import Disk, Rect, Region

# Two disjoint squares along the diagonal, side 0.3.
TWO_SQUARES = Region((Rect(0.1, 0.4, 0.1, 0.4), Rect(0.6, 0.9, 0.6, 0.9)))

# L-shaped inclusion: a vertical bar joined to a horizontal foot.
L_SHAPE = Region((Rect(0.2, 0.4, 0.2, 0.8), Rect(0.4, 0.8, 0.2, 0.4)))

CENTRAL_DISK = Region((Disk(0.5, 0.5, 0.3),))


def _spec(name: str, target: Region, initial: Region, seed: int, noise: float, **kw) -> ExperimentSpec:
    beta_rule = kw.pop("beta_rule", "fixed")
    rec = ReconstructionConfig(alpha=0.75, beta=0.0, epsilon=0.125, max_iterations=3000, seed=seed, **kw)
    return ExperimentSpec(
        name=name,
        target=target,
        initial=initial,
        forward_grid_n=129,
        inversion_grid_n=65,
        noise_level=noise,
        seed=seed,
        reconstruction=rec,
        beta_rule=beta_rule,
        output_dir=f"out/{name}",
    )


def exact_two_squares(seed: int = 0) -> ExperimentSpec:
    return _spec("exact_two_squares", TWO_SQUARES, CENTRAL_DISK, seed, 0.0)


def noise10(seed: int = 0) -> ExperimentSpec:
    return _spec("noise10", TWO_SQUARES, CENTRAL_DISK, seed, 0.10, beta_rule="fit")


def noise50(seed: int = 0) -> ExperimentSpec:
    return _spec("noise50", TWO_SQUARES, CENTRAL_DISK, seed, 0.50, beta_rule="fit")


def nonconvex_l(seed: int = 0) -> ExperimentSpec:
    return _spec("nonconvex_L", L_SHAPE, CENTRAL_DISK, seed, 0.0)


PRESETS = {
    "exact_two_squares": exact_two_squares,
    "noise10": noise10,
    "noise50": noise50,
    "nonconvex_L": nonconvex_l,
}


def get_preset(name: str, seed: int | None = None) -> ExperimentSpec:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return factory() if seed is None else factory(seed)
