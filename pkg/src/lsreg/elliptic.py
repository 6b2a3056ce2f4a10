"""Elliptic solves used by every iteration and the forward operator.

Three systems appear, all assembled from 5-point stencils:

* ``Laplace(u) = s`` with ``u = g`` on the boundary (Dirichlet, interior
  unknowns only), used for the potential and for the harmonic extension;
* ``(I - Laplace) w = f`` with homogeneous Neumann closure by mirrored ghost
  nodes, used to smooth the velocity.

The Dirichlet matrix is symmetric as assembled. The Neumann matrix becomes
symmetric after scaling rows by the trapezoid weights, so both are solved as
SPD systems. Factorizations are cached per grid size.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import Grid, check_field, check_trace, neumann_trace

TOLERANCE = 1e-10


class SolverError(RuntimeError):
    """A linear solve missed its residual tolerance."""

    def __init__(self, message: str, iterations: int | None = None, residual: float | None = None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


def _second_difference(m: int, h: float, neumann: bool) -> sp.csr_matrix:
    d = sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1], format="lil")
    if neumann:
        d[0, 1] = 2.0
        d[m - 1, m - 2] = 2.0
    return d.tocsr() / h**2


@lru_cache(maxsize=16)
def _dirichlet_operator(n: int) -> tuple[sp.csc_matrix, object]:
    h = 1.0 / (n - 1)
    m = n - 2
    eye = sp.identity(m, format="csr")
    d = _second_difference(m, h, neumann=False)
    a = (-(sp.kron(d, eye) + sp.kron(eye, d))).tocsc()
    return a, spla.factorized(a)


@lru_cache(maxsize=16)
def _helmholtz_operator(n: int) -> tuple[sp.csc_matrix, object, np.ndarray]:
    h = 1.0 / (n - 1)
    w1 = np.full(n, h)
    w1[0] = w1[-1] = 0.5 * h
    weights = np.outer(w1, w1).ravel()
    eye = sp.identity(n, format="csr")
    d = _second_difference(n, h, neumann=True)
    lap = sp.kron(d, eye) + sp.kron(eye, d)
    a = (sp.diags(weights) @ (sp.identity(n * n) - lap)).tocsc()
    # symmetrize away round-off so CG sees an exactly symmetric matrix
    a = (0.5 * (a + a.T)).tocsc()
    return a, spla.factorized(a), weights


def _solve_spd(a, solve, b: np.ndarray, method: str) -> np.ndarray:
    if method not in ("direct", "cg"):
        raise ValueError(f"unknown solver method {method!r}")
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros_like(b)
    if method == "direct":
        x = solve(b)
        iterations = None
    elif method == "cg":
        counter = {"it": 0}

        def cb(_):
            counter["it"] += 1

        x, info = spla.cg(a, b, rtol=TOLERANCE, atol=0.0, maxiter=10 * a.shape[0], callback=cb)
        iterations = counter["it"]
        if info > 0:
            res = np.linalg.norm(a @ x - b) / bnorm
            raise SolverError(
                f"CG did not converge in {iterations} iterations (residual {res:.3e})",
                iterations=iterations,
                residual=res,
            )
    res = np.linalg.norm(a @ x - b) / bnorm
    if not res <= TOLERANCE:
        raise SolverError(
            f"linear solve residual {res:.3e} exceeds {TOLERANCE:.0e}",
            iterations=iterations,
            residual=res,
        )
    return x


def _dirichlet_solve(grid: Grid, source: np.ndarray, boundary: np.ndarray | None, method: str):
    n = grid.n
    h2 = grid.spacing**2
    a, solve = _dirichlet_operator(n)
    rhs = -source[1:-1, 1:-1].copy()
    u = np.zeros(grid.shape)
    if boundary is not None:
        u[:] = grid.extend_boundary(boundary)
        rhs[0, :] += u[0, 1:-1] / h2
        rhs[-1, :] += u[-1, 1:-1] / h2
        rhs[:, 0] += u[1:-1, 0] / h2
        rhs[:, -1] += u[1:-1, -1] / h2
    u[1:-1, 1:-1] = _solve_spd(a, solve, rhs.ravel(), method).reshape(n - 2, n - 2)
    return u


def solve_poisson_dirichlet(grid: Grid, source: np.ndarray, method: str = "direct") -> np.ndarray:
    """Solve ``Laplace_h u = source`` inside with ``u = 0`` on the boundary."""
    source = check_field(grid, source, "source")
    return _dirichlet_solve(grid, source, None, method)


def solve_laplace_dirichlet(grid: Grid, boundary_data: np.ndarray, method: str = "direct") -> np.ndarray:
    """Discrete harmonic extension of ``boundary_data``.

    Applied to a boundary residual this is the adjoint of the linearized
    forward map with respect to the boundary and area quadratures of ``grid``.
    """
    boundary_data = check_trace(grid, boundary_data, "boundary_data")
    return _dirichlet_solve(grid, np.zeros(grid.shape), boundary_data, method)


def solve_helmholtz_neumann(grid: Grid, rhs: np.ndarray, method: str = "direct") -> np.ndarray:
    """Solve ``(I - Laplace_h) w = rhs`` on all nodes, ``dw/dnu = 0``."""
    rhs = check_field(grid, rhs, "rhs")
    a, solve, weights = _helmholtz_operator(grid.n)
    w = _solve_spd(a, solve, weights * rhs.ravel(), method)
    return w.reshape(grid.shape)


def apply_helmholtz_neumann(grid: Grid, w: np.ndarray) -> np.ndarray:
    """``(I - Laplace_h) w`` with mirrored ghost nodes."""
    p = np.pad(w, 1, mode="reflect")
    lap = (p[2:, 1:-1] + p[:-2, 1:-1] + p[1:-1, 2:] + p[1:-1, :-2] - 4.0 * w) / grid.spacing**2
    return w - lap


def forward(grid: Grid, z: np.ndarray, method: str = "direct") -> np.ndarray:
    """Neumann trace of the potential with density ``z``.

    ``z`` is the nodal density (normally a material field in ``[0, 1]``).
    """
    z = check_field(grid, z, "z")
    u = solve_poisson_dirichlet(grid, z, method)
    return neumann_trace(grid, u, source=z)


def forward_linearization(grid: Grid, s: np.ndarray, method: str = "direct") -> np.ndarray:
    """Derivative of :func:`forward` in direction ``s``.

    The forward map is linear in the density, so this is the same map and
    does not depend on the base point.
    """
    return forward(grid, s, method)
