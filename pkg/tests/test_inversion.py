import numpy as np
import pytest
from scipy import ndimage

from lsreg.elliptic import forward, solve_laplace_dirichlet
from lsreg.grid import Grid
from lsreg.inversion import (
    DivergenceError,
    ReconstructionConfig,
    component_count,
    evaluate_functional,
    fit_to_data_beta_alpha,
    fixed_point_iterates,
    h1_norm_sq,
    run,
    step,
    velocity,
)
from lsreg.projection import project_smooth, project_smooth_derivative, signed_distance_init


def _bfs_components(mask):
    """Reference 4-connected flood fill."""
    seen = np.zeros_like(mask, dtype=bool)
    count = 0
    for start in zip(*np.nonzero(mask)):
        if seen[start]:
            continue
        count += 1
        stack = [start]
        seen[start] = True
        while stack:
            i, j = stack.pop()
            for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
                if 0 <= a < mask.shape[0] and 0 <= b < mask.shape[1] and mask[a, b] and not seen[a, b]:
                    seen[a, b] = True
                    stack.append((a, b))
    return count


@pytest.fixture(scope="module")
def setup():
    g = Grid(33)
    X, Y = g.meshgrid()
    target = (((X - 0.3) ** 2 + (Y - 0.3) ** 2 < 0.02) | ((X - 0.7) ** 2 + (Y - 0.7) ** 2 < 0.02)).astype(float)
    data = forward(Grid(65), np.kron(target, np.ones((2, 2)))[:65, :65])[::2]
    phi0 = signed_distance_init(g, lambda X, Y: np.hypot(X - 0.5, Y - 0.5) < 0.3)
    return g, data, phi0


class TestConfig:
    def test_defaults(self):
        cfg = ReconstructionConfig()
        assert cfg.inner_fixed_point_steps == 1 and cfg.beta_alpha == 0.0

    @pytest.mark.parametrize(
        "kw",
        [dict(alpha=0), dict(beta=-1), dict(epsilon=0), dict(h=0), dict(max_iterations=-1),
         dict(inner_fixed_point_steps=0), dict(anchor="other"), dict(solver="lu")],
    )
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            ReconstructionConfig(**kw)

    def test_with_beta_alpha(self):
        cfg = ReconstructionConfig(alpha=2.0).with_beta_alpha(0.5)
        assert cfg.beta == pytest.approx(0.25) and cfg.beta_alpha == pytest.approx(0.5)


def test_component_count_matches_flood_fill(rng):
    for _ in range(30):
        z = ndimage.uniform_filter(rng.random((40, 40)), 3)
        assert component_count(z, 0.55) == _bfs_components(z >= 0.55)


def test_component_count_examples():
    z = np.zeros((10, 10))
    assert component_count(z) == 0
    z[1:3, 1:3] = 1
    z[6:9, 6:9] = 0.7
    assert component_count(z) == 2
    z[3, 3] = 1  # diagonal touch does not connect
    assert component_count(z) == 3


def test_h1_norm_of_linear_field(g33):
    X, Y = g33.meshgrid()
    # (2x+1)^2 integrates to 13/3, |grad|^2 to 4
    assert h1_norm_sq(g33, 2 * X + 1) == pytest.approx(13 / 3 + 4, rel=1e-3)


def test_functional_terms(setup):
    g, data, phi0 = setup
    cfg = ReconstructionConfig(alpha=0.5, beta=0.2)
    phi = phi0 + 0.01
    rec = evaluate_functional(g, phi, phi0, data, cfg, index=4)
    assert rec.index == 4
    assert rec.functional == pytest.approx(rec.residual_sq + 2 * 0.2 * 0.5 * rec.bv_value + 0.5 * rec.penalty)
    assert rec.penalty == pytest.approx(0.01**2 * g.integrate(np.ones(g.shape)))


def test_gradient_matches_finite_differences(setup, rng):
    g, data, phi0 = setup
    cfg = ReconstructionConfig()
    proj = cfg.projection
    phi = phi0 - 0.05
    z = project_smooth(phi, proj)
    v = solve_laplace_dirichlet(g, forward(g, z) - data)
    analytic = project_smooth_derivative(phi, proj) * v

    def misfit(p):
        r = forward(g, project_smooth(p, proj)) - data
        return 0.5 * g.boundary_inner(r, r)

    d = 1e-4
    band = np.argwhere((phi > -proj.epsilon + 2 * d) & (phi < -2 * d) & g.interior_mask)
    picks = band[rng.choice(len(band), 20, replace=False)]
    for i, j in picks:
        e = np.zeros(g.shape)
        e[i, j] = d
        fd = (misfit(phi + e) - misfit(phi - e)) / (2 * d) / g.node_weights[i, j]
        assert abs(fd - analytic[i, j]) <= 1e-3 * abs(analytic[i, j])


def test_velocity_vanishes_for_exact_fit(setup):
    g, _, phi0 = setup
    cfg = ReconstructionConfig()
    data = forward(g, project_smooth(phi0, cfg.projection))
    assert np.allclose(velocity(g, phi0, data, cfg), 0.0, atol=1e-12)


def test_single_step_reduces_misfit(setup):
    g, data, phi0 = setup
    cfg = ReconstructionConfig(alpha=1.0)
    r0 = evaluate_functional(g, phi0, phi0, data, cfg).residual_sq
    phi1 = step(g, phi0, phi0, data, cfg)
    assert evaluate_functional(g, phi1, phi0, data, cfg).residual_sq < r0


def test_fixed_point_iterates_count(setup):
    g, data, phi0 = setup
    cfg = ReconstructionConfig(inner_fixed_point_steps=3)
    its = fixed_point_iterates(g, phi0, phi0, data, cfg)
    assert len(its) == 4 and its[0] is phi0


def _inner_ratios(g, data, phi0, alpha):
    cfg = ReconstructionConfig(alpha=alpha, inner_fixed_point_steps=3)
    its = fixed_point_iterates(g, phi0, phi0, data, cfg)
    d = [np.sqrt(h1_norm_sq(g, b - a)) for a, b in zip(its, its[1:])]
    return d[1] / d[0], d[2] / d[1]


def test_inner_iteration_contracts_for_large_alpha(setup):
    g, data, phi0 = setup
    r1, r2 = _inner_ratios(g, data, phi0, alpha=10.0)
    assert r1 < 0.5 and r2 < 0.5


def test_inner_contraction_improves_with_alpha(setup):
    g, data, phi0 = setup
    ratios = [_inner_ratios(g, data, phi0, a)[0] for a in (2.0, 5.0, 10.0)]
    assert ratios[0] > ratios[1] > ratios[2]


def test_run_records_and_snapshots(setup):
    g, data, phi0 = setup
    cfg = ReconstructionConfig(max_iterations=12)
    res = run(g, phi0, data, cfg, snapshot_schedule=(0, 1, 10, 50))
    assert [r.index for r in res.records] == list(range(1, 13))
    assert sorted(res.snapshots) == [0, 1, 10]
    assert np.array_equal(res.snapshots[0], project_smooth(phi0, cfg.projection))
    assert res.error is None


def test_run_zero_iterations(setup):
    g, data, phi0 = setup
    res = run(g, phi0, data, ReconstructionConfig(max_iterations=0), (0,))
    assert res.records == [] and np.array_equal(res.phi, phi0)


def test_run_is_deterministic(setup):
    g, data, phi0 = setup
    cfg = ReconstructionConfig(max_iterations=20)
    a, b = run(g, phi0, data, cfg), run(g, phi0, data, cfg)
    assert a.records == b.records and np.array_equal(a.phi, b.phi)


def test_stop_residual(setup):
    g, data, phi0 = setup
    full = run(g, phi0, data, ReconstructionConfig(max_iterations=30))
    target = full.records[9].residual_sq
    res = run(g, phi0, data, ReconstructionConfig(max_iterations=30, stop_residual=target))
    assert len(res.records) <= 10


def test_fixed_anchor_penalty_grows_from_initial(setup):
    g, data, phi0 = setup
    res = run(g, phi0, data, ReconstructionConfig(max_iterations=5, anchor="fixed"))
    assert res.records[-1].penalty == pytest.approx(h1_norm_sq(g, res.phi - phi0))


def test_divergence_is_reported(setup):
    g, _, phi0 = setup
    huge = np.full(g.num_boundary, 1e12)
    res = run(g, phi0, huge, ReconstructionConfig(alpha=1e-3, max_iterations=5))
    assert isinstance(res.error, DivergenceError)
    assert res.error.history == res.records


class TestFitToData:
    def test_formula(self):
        from lsreg.inversion import IterationRecord

        g = Grid(9)
        probe = IterationRecord(0, 0.0, 2.0, 0.0, 0.0, 1)
        data = np.full(g.num_boundary, 1.0)
        data = data / g.boundary_norm(data)
        assert fit_to_data_beta_alpha(g, 0.1, data, probe) == pytest.approx(0.0025)
        assert fit_to_data_beta_alpha(g, 0.0, data, probe) == 0.0

    def test_errors(self):
        from lsreg.inversion import IterationRecord

        g = Grid(9)
        flat = IterationRecord(0, 0.0, 0.0, 0.0, 0.0, 1)
        with pytest.raises(ValueError):
            fit_to_data_beta_alpha(g, 0.1, np.ones(g.num_boundary), flat)
        with pytest.raises(ValueError):
            fit_to_data_beta_alpha(g, -0.1, np.ones(g.num_boundary), flat)
