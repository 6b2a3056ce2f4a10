"""Quick property checks behind ``lsreg selftest``.

Each check returns ``(ok, detail)``; they run in a few seconds and share no
state, so they double as a smoke test after installation.
"""

from __future__ import annotations

import math

import numpy as np

from .elliptic import forward, solve_laplace_dirichlet, solve_poisson_dirichlet
from .geometry import bv_seminorm
from .grid import Grid
from .harness.experiment import add_noise
from .harness.shapes import Rect, Region
from .projection import ProjectionParams, project_smooth


def poisson_order() -> tuple[bool, str]:
    errs = []
    for n in (33, 65):
        g = Grid(n)
        X, Y = g.meshgrid()
        exact = np.sin(np.pi * X) * np.sin(np.pi * Y)
        u = solve_poisson_dirichlet(g, -2 * np.pi**2 * exact)
        errs.append(np.max(np.abs(u - exact)))
    order = math.log2(errs[0] / errs[1])
    return 1.8 <= order <= 2.2, f"order {order:.3f}"


def adjoint_identity(pairs: int = 10, n: int = 17) -> tuple[bool, str]:
    g = Grid(n)
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(pairs):
        s = rng.standard_normal(g.shape)
        r = rng.standard_normal(g.num_boundary)
        lhs = g.boundary_inner(forward(g, s), r)
        rhs = g.integrate(s * solve_laplace_dirichlet(g, r))
        worst = max(worst, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
    return worst < 1e-6, f"max relative gap {worst:.2e}"


def projection_contract(pairs: int = 100) -> tuple[bool, str]:
    g = Grid(17)
    p = ProjectionParams(epsilon=0.125)
    rng = np.random.default_rng(2)
    ok = True
    for _ in range(pairs):
        a, b = rng.normal(0, 0.2, (2, *g.shape))
        za, zb = project_smooth(a, p), project_smooth(b, p)
        ok &= bool(za.min() >= 0 and za.max() <= 1)
        lhs = g.integrate(np.abs(za - zb))
        rhs = math.sqrt(g.integrate((a - b) ** 2)) / p.epsilon
        ok &= lhs <= rhs + 1e-12
    return ok, f"{pairs} random pairs"


def square_perimeter() -> tuple[bool, str]:
    g = Grid(65)
    z = Region((Rect(0.25, 0.75, 0.25, 0.75),)).coverage(g)
    tv = bv_seminorm(g, z)
    return abs(tv - 2.0) <= 2 * g.spacing, f"TV {tv:.4f} vs 2"


def noise_calibration() -> tuple[bool, str]:
    y = np.sin(np.linspace(0, 3, 64))
    noisy = add_noise(y, 0.5, 7)
    rel = np.max(np.abs(noisy - y)) / np.max(np.abs(y))
    return abs(rel - 0.5) < 1e-12, f"relative sup error {rel:.15f}"


CHECKS = {
    "poisson_convergence": poisson_order,
    "adjoint_identity": adjoint_identity,
    "projection_contract": projection_contract,
    "square_perimeter": square_perimeter,
    "noise_calibration": noise_calibration,
}


def run_all():
    for name, fn in CHECKS.items():
        try:
            ok, detail = fn()
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield name, ok, detail
