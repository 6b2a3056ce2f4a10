"""Level set regularization for a binary inverse source problem on the unit square."""

from .elliptic import SolverError, forward, solve_helmholtz_neumann, solve_laplace_dirichlet, solve_poisson_dirichlet
from .grid import Grid, make_grid
from .inversion import ReconstructionConfig, RunResult, run
from .projection import ProjectionParams, project_smooth, signed_distance_init

__version__ = "0.1.0"

__all__ = [
    "Grid",
    "ProjectionParams",
    "ReconstructionConfig",
    "RunResult",
    "SolverError",
    "forward",
    "make_grid",
    "project_smooth",
    "run",
    "signed_distance_init",
    "solve_helmholtz_neumann",
    "solve_laplace_dirichlet",
    "solve_poisson_dirichlet",
]
