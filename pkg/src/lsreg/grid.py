"""Uniform node grid on the unit square and the finite-difference stencils
shared by every solver.

Fields are plain ``(n, n)`` float arrays indexed ``field[i, j]`` with
``x = i * spacing`` and ``y = j * spacing``. Boundary traces are 1D arrays of
length ``4 * (n - 1)`` ordered counterclockwise starting at the origin:

    bottom edge  (0, 0)   -> (n-2, 0)
    right edge   (n-1, 0) -> (n-1, n-2)
    top edge     (n-1, n-1) -> (1, n-1)
    left edge    (0, n-1) -> (0, 1)
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np


def _unit_spacing(m: int) -> float:
    # pick the float closest to 1/m that still satisfies s * m == 1.0
    s = 1.0 / m
    if s * m == 1.0:
        return s
    for cand in (np.nextafter(s, 1.0), np.nextafter(s, 0.0)):
        if cand * m == 1.0:
            return float(cand)
    return s


@dataclass(frozen=True)
class Grid:
    """Cell-vertex grid of ``n x n`` nodes covering ``[0, 1]^2``."""

    n: int
    spacing: float = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"grid needs n >= 3 nodes per side, got {self.n}")
        object.__setattr__(self, "spacing", _unit_spacing(self.n - 1))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def num_nodes(self) -> int:
        return self.n * self.n

    @property
    def num_boundary(self) -> int:
        return 4 * (self.n - 1)

    @property
    def num_interior(self) -> int:
        return (self.n - 2) ** 2

    @cached_property
    def coords(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.n)

    def meshgrid(self) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(X, Y)`` arrays with ``X[i, j] = x_i``."""
        return np.meshgrid(self.coords, self.coords, indexing="ij")

    @cached_property
    def boundary_nodes(self) -> tuple[np.ndarray, np.ndarray]:
        """``(i, j)`` index arrays of the boundary in traversal order."""
        m = self.n - 1
        k = np.arange(m)
        i = np.concatenate([k, np.full(m, m), m - k, np.zeros(m, dtype=int)])
        j = np.concatenate([np.zeros(m, dtype=int), k, np.full(m, m), m - k])
        return i, j

    @cached_property
    def corner_positions(self) -> np.ndarray:
        """Positions of the four corners inside a boundary trace."""
        return np.arange(4) * (self.n - 1)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[0, :] = mask[-1, :] = mask[:, 0] = mask[:, -1] = True
        return mask

    @property
    def interior_mask(self) -> np.ndarray:
        return ~self.boundary_mask

    @cached_property
    def _interior_lookup(self) -> np.ndarray:
        lookup = np.full(self.shape, -1, dtype=int)
        lookup[1:-1, 1:-1] = np.arange(self.num_interior).reshape(self.n - 2, self.n - 2)
        return lookup

    @cached_property
    def _boundary_lookup(self) -> np.ndarray:
        lookup = np.full(self.shape, -1, dtype=int)
        i, j = self.boundary_nodes
        lookup[i, j] = np.arange(self.num_boundary)
        return lookup

    def global_index(self, i: int, j: int) -> int:
        return i * self.n + j

    def node_of(self, k: int) -> tuple[int, int]:
        return divmod(k, self.n)

    def interior_index(self, i: int, j: int) -> int:
        k = self._interior_lookup[i, j]
        if k < 0:
            raise ValueError(f"node ({i}, {j}) is on the boundary")
        return int(k)

    def interior_node(self, k: int) -> tuple[int, int]:
        i, j = divmod(k, self.n - 2)
        return i + 1, j + 1

    def boundary_index(self, i: int, j: int) -> int:
        k = self._boundary_lookup[i, j]
        if k < 0:
            raise ValueError(f"node ({i}, {j}) is interior")
        return int(k)

    def boundary_node(self, k: int) -> tuple[int, int]:
        i, j = self.boundary_nodes
        return int(i[k]), int(j[k])

    @cached_property
    def node_weights(self) -> np.ndarray:
        """Tensor trapezoid weights for integrals over the square."""
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return np.outer(w, w)

    @cached_property
    def boundary_weights(self) -> np.ndarray:
        """Quadrature weights for boundary traces.

        Edge nodes carry ``spacing``; corners carry ``spacing / 2``. With this
        choice the boundary pairing of :func:`neumann_trace` (flux form) and
        the area pairing with ``node_weights`` satisfy a discrete Green
        identity exactly.
        """
        w = np.full(self.num_boundary, self.spacing)
        w[self.corner_positions] = 0.5 * self.spacing
        return w

    def integrate(self, f: np.ndarray) -> float:
        return float(np.sum(self.node_weights * f))

    def boundary_inner(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.sum(self.boundary_weights * a * b))

    def boundary_norm(self, a: np.ndarray) -> float:
        return float(np.sqrt(self.boundary_inner(a, a)))

    def restrict_boundary(self, f: np.ndarray) -> np.ndarray:
        """Boundary values of a nodal field, in traversal order."""
        i, j = self.boundary_nodes
        return f[i, j]

    def extend_boundary(self, trace: np.ndarray) -> np.ndarray:
        """Nodal field equal to ``trace`` on the boundary and zero inside."""
        f = np.zeros(self.shape)
        i, j = self.boundary_nodes
        f[i, j] = trace
        return f


def make_grid(n: int) -> Grid:
    return Grid(n)


def check_field(grid: Grid, f: np.ndarray, name: str = "field") -> np.ndarray:
    f = np.asarray(f, dtype=float)
    if f.shape != grid.shape:
        raise ValueError(f"{name} has shape {f.shape}, grid expects {grid.shape}")
    if not np.all(np.isfinite(f)):
        raise ValueError(f"{name} contains non-finite values")
    return f


def check_trace(grid: Grid, t: np.ndarray, name: str = "trace") -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.shape != (grid.num_boundary,):
        raise ValueError(f"{name} has shape {t.shape}, grid expects ({grid.num_boundary},)")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contains non-finite values")
    return t


def laplacian(grid: Grid, f: np.ndarray) -> np.ndarray:
    """5-point Laplacian on interior nodes; boundary entries are left at zero."""
    out = np.zeros(grid.shape)
    out[1:-1, 1:-1] = (
        f[2:, 1:-1] + f[:-2, 1:-1] + f[1:-1, 2:] + f[1:-1, :-2] - 4.0 * f[1:-1, 1:-1]
    ) / grid.spacing**2
    return out


def laplacian_stencil(grid: Grid, f: np.ndarray, node: tuple[int, int]) -> float:
    i, j = node
    if not (0 < i < grid.n - 1 and 0 < j < grid.n - 1):
        raise ValueError(f"laplacian stencil needs an interior node, got {node}")
    return float(
        (f[i + 1, j] + f[i - 1, j] + f[i, j + 1] + f[i, j - 1] - 4.0 * f[i, j])
        / grid.spacing**2
    )


def _edges(f: np.ndarray) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Per edge: (boundary row, first inward row, second inward row),
    each ordered along the traversal direction, corners included at both ends."""
    return [
        (f[:, 0], f[:, 1], f[:, 2]),
        (f[-1, :], f[-2, :], f[-3, :]),
        (f[::-1, -1], f[::-1, -2], f[::-1, -3]),
        (f[0, ::-1], f[1, ::-1], f[2, ::-1]),
    ]


def _tangential_second_difference(row: np.ndarray, h: float) -> np.ndarray:
    d2 = np.empty_like(row)
    d2[1:-1] = row[2:] - 2.0 * row[1:-1] + row[:-2]
    d2[0] = row[0] - 2.0 * row[1] + row[2]
    d2[-1] = row[-1] - 2.0 * row[-2] + row[-3]
    return d2 / h**2


def neumann_trace(grid: Grid, f: np.ndarray, source: np.ndarray | None = None) -> np.ndarray:
    """Outward normal derivative of ``f`` on every boundary node.

    Without ``source`` the one-sided 3-point formula
    ``(3 f_b - 4 f_1 + f_2) / (2 h)`` is used. When ``source`` (the nodal
    right-hand side of ``Laplace(f) = source``) is given, the flux form

        (f_b - f_1) / h + (h / 2) * (source_b - d_tt f_b)

    is used instead. Both are second order; the flux form is the exact
    transpose of the discrete harmonic extension, which the adjoint relies on.
    Corners take the mean of the two edge derivatives meeting there.
    """
    h = grid.spacing
    n = grid.n
    per_edge = []
    src_edges = _edges(source) if source is not None else [None] * 4
    for (fb, f1, f2), src in zip(_edges(f), src_edges):
        if src is None:
            d = (3.0 * fb - 4.0 * f1 + f2) / (2.0 * h)
        else:
            d = (fb - f1) / h + 0.5 * h * (src[0] - _tangential_second_difference(fb, h))
        per_edge.append(d)
    trace = np.empty(grid.num_boundary)
    m = n - 1
    for e, d in enumerate(per_edge):
        trace[e * m : (e + 1) * m] = d[:m]
    # corner e*m is the start of edge e and the end of edge e-1
    for e in range(4):
        trace[e * m] = 0.5 * (per_edge[e][0] + per_edge[e - 1][-1])
    return trace


def gradient(grid: Grid, f: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centered differences inside, first-order one-sided at the boundary."""
    gx, gy = np.gradient(f, grid.spacing, grid.spacing)
    return gx, gy


def divergence(grid: Grid, fx: np.ndarray, fy: np.ndarray) -> np.ndarray:
    return np.gradient(fx, grid.spacing, axis=0) + np.gradient(fy, grid.spacing, axis=1)
