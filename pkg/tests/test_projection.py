import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from lsreg.grid import Grid
from lsreg.projection import (
    ProjectionParams,
    project_clamp,
    project_exp,
    project_sharp,
    project_smooth,
    project_smooth_derivative,
    signed_distance_init,
)

EPS = ProjectionParams(epsilon=0.125)
finite = st.floats(-10, 10, allow_nan=False)


@given(arrays(float, (6, 6), elements=finite))
def test_smooth_range(phi):
    z = project_smooth(phi, EPS)
    assert np.all((z >= 0) & (z <= 1))


@given(arrays(float, 20, elements=finite), arrays(float, 20, elements=st.floats(0, 5)))
def test_smooth_monotone(phi, bump):
    assert np.all(project_smooth(phi + bump, EPS) >= project_smooth(phi, EPS))


@given(arrays(float, 20, elements=finite), arrays(float, 20, elements=finite))
def test_smooth_pointwise_lipschitz(a, b):
    diff = np.abs(project_smooth(a, EPS) - project_smooth(b, EPS))
    assert np.all(diff <= np.abs(a - b) / EPS.epsilon + 1e-12)


def test_smooth_values():
    phi = np.array([-1.0, -0.125, -0.0625, 0.0, 0.3])
    assert np.allclose(project_smooth(phi, EPS), [0, 0, 0.5, 1, 1])


def test_derivative_band_is_closed():
    phi = np.array([-0.2, -0.125, -0.05, 0.0, 1e-9])
    assert np.allclose(project_smooth_derivative(phi, EPS), [0, 8, 8, 8, 0])


def test_derivative_matches_difference_quotient_off_kinks(rng):
    phi = rng.uniform(-0.3, 0.2, 200)
    phi = phi[(np.abs(phi) > 1e-3) & (np.abs(phi + 0.125) > 1e-3)]
    d = 1e-6
    fd = (project_smooth(phi + d, EPS) - project_smooth(phi - d, EPS)) / (2 * d)
    assert np.allclose(fd, project_smooth_derivative(phi, EPS), atol=1e-6)


def test_l1_lipschitz_on_random_pairs(rng):
    g = Grid(33)
    for _ in range(100):
        a, b = rng.normal(0, 0.3, (2, *g.shape))
        lhs = g.integrate(np.abs(project_smooth(a, EPS) - project_smooth(b, EPS)))
        rhs = (1 / EPS.epsilon) * 1.0 * np.sqrt(g.integrate((a - b) ** 2))
        assert lhs <= rhs


def test_smooth_converges_to_sharp():
    g = Grid(129)
    X, Y = g.meshgrid()
    phi = 0.3 - np.hypot(X - 0.5, Y - 0.5)
    gaps = [g.integrate(np.abs(project_smooth(phi, ProjectionParams(e)) - project_sharp(phi))) for e in (0.2, 0.1, 0.05)]
    assert gaps[0] > gaps[1] > gaps[2]
    # the ramp region is a ring of width epsilon, so the gap is O(epsilon)
    assert gaps[1] / gaps[2] == pytest.approx(2.0, rel=0.1)


def test_sharp_is_indicator():
    assert np.array_equal(project_sharp(np.array([-1e-9, 0.0, 2.0])), [0, 1, 1])


def test_clamp():
    assert np.array_equal(project_clamp(np.array([-3.0, 0.5, 9.0]), 1.0), [-1, 0.5, 1])
    with pytest.raises(ValueError):
        project_clamp(np.zeros(3), 0.0)


def test_exp():
    assert np.all(project_exp(np.array([-50.0, 0.0, 3.0])) > 0)
    with pytest.raises(ValueError):
        project_exp(np.array([701.0]))
    with pytest.raises(ValueError):
        project_exp(np.array([np.nan]))


def test_params_validation():
    with pytest.raises(ValueError):
        ProjectionParams(epsilon=0.0)
    with pytest.raises(ValueError):
        ProjectionParams(h=-1.0)


class TestSignedDistance:
    def test_disk(self):
        g = Grid(65)
        phi = signed_distance_init(g, lambda X, Y: np.hypot(X - 0.5, Y - 0.5) <= 0.2)
        assert phi[32, 32] == pytest.approx(0.2, abs=g.spacing)
        # the farthest corner is sqrt(2)/2 - 0.2 away from the circle
        assert phi[0, 0] == pytest.approx(-(np.sqrt(0.5) - 0.2), abs=g.spacing)

    def test_sign_matches_region(self):
        g = Grid(33)
        pred = lambda X, Y: (X > 0.3) & (Y < 0.6)  # noqa: E731
        phi = signed_distance_init(g, pred)
        X, Y = g.meshgrid()
        inside = pred(X, Y)
        assert np.all(phi[inside] > 0) and np.all(phi[~inside] < 0)

    def test_unit_gradient_away_from_skeleton(self):
        g = Grid(65)
        phi = signed_distance_init(g, lambda X, Y: np.hypot(X - 0.5, Y - 0.5) <= 0.25)
        gx, gy = np.gradient(phi, g.spacing)
        ring = slice(8, 13), slice(30, 35)
        assert np.allclose(np.hypot(gx, gy)[ring], 1.0, atol=0.1)

    def test_degenerate_regions(self):
        g = Grid(9)
        assert np.all(signed_distance_init(g, lambda X, Y: X < -1) == -np.sqrt(2))
        assert np.all(signed_distance_init(g, lambda X, Y: X > -1) == np.sqrt(2))

    @given(st.integers(1, 64))
    @settings(max_examples=10, deadline=None)
    def test_chunking_is_irrelevant(self, chunk):
        g = Grid(11)
        pred = lambda X, Y: np.hypot(X - 0.4, Y - 0.6) < 0.3  # noqa: E731
        assert np.array_equal(signed_distance_init(g, pred, chunk=chunk), signed_distance_init(g, pred))
