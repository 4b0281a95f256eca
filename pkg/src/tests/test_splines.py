"""
Tests for one-dimensional spline spaces, quadrature and 1D operators.
"""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.domain.exceptions import ConfigurationError, DomainError
from src.domain.services import splines
from src.domain.value_objects.spline_space import Boundary

PERIODIC, CLAMPED = Boundary.PERIODIC, Boundary.CLAMPED


class TestSplineSpace:
    """Test construction of uniform spline spaces."""

    @pytest.mark.parametrize("degree,n_cells,boundary,expected", [
        (2, 4, PERIODIC, 4),
        (3, 4, PERIODIC, 4),
        (2, 8, CLAMPED, 10),
        (0, 5, CLAMPED, 5),
        (1, 4, CLAMPED, 5),
    ])
    def test_dimension(self, degree, n_cells, boundary, expected):
        """Test dim = n for periodic and n + p for clamped spaces."""
        assert splines.build_space(degree, n_cells, boundary).dimension == expected

    def test_greville_points_clamped_linear(self):
        """Test the Greville points of S_1 on 4 clamped cells are the breakpoints."""
        space = splines.build_space(1, 4, CLAMPED)
        np.testing.assert_allclose(splines.greville_points(space), [0.0, 0.25, 0.5, 0.75, 1.0])

    def test_greville_points_periodic_quadratic(self):
        """Test periodic quadratic Greville points sit at cell midpoints, sorted in [a, b)."""
        space = splines.build_space(2, 4, PERIODIC)
        np.testing.assert_allclose(splines.greville_points(space), [0.125, 0.375, 0.625, 0.875])

    def test_degree_zero_greville_points_are_midpoints(self):
        """Test degree-0 interpolation sites."""
        space = splines.build_space(0, 2, PERIODIC, (0.0, 1.0))
        np.testing.assert_allclose(space.greville, [0.25, 0.75])

    @pytest.mark.parametrize("degree,n_cells,boundary,interval", [
        (-1, 4, CLAMPED, (0.0, 1.0)),
        (2, 0, CLAMPED, (0.0, 1.0)),
        (3, 3, PERIODIC, (0.0, 1.0)),
        (1, 4, CLAMPED, (1.0, 1.0)),
    ])
    def test_invalid_space(self, degree, n_cells, boundary, interval):
        """Test invalid sizes raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            splines.build_space(degree, n_cells, boundary, interval)


class TestBasisEvaluation:
    """Test B-spline evaluation."""

    @settings(max_examples=60, deadline=None)
    @given(
        x=st.floats(min_value=0.0, max_value=1.0),
        degree=st.integers(min_value=0, max_value=4),
        n_cells=st.integers(min_value=5, max_value=12),
        periodic=st.booleans(),
    )
    def test_partition_of_unity(self, x, degree, n_cells, periodic):
        """Test the basis sums to one everywhere in the domain."""
        space = splines.build_space(degree, n_cells, PERIODIC if periodic else CLAMPED)
        total = sum(v for _, v in splines.eval_basis(space, x))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_linear_basis_at_knot(self):
        """Test a degree-1 basis at an interior knot has one value 1 and the rest 0."""
        space = splines.build_space(1, 4, CLAMPED)
        values = sorted(v for _, v in splines.eval_basis(space, 0.5))
        assert values[-1] == pytest.approx(1.0)
        assert all(abs(v) < 1e-14 for v in values[:-1])

    @pytest.mark.parametrize("boundary", [PERIODIC, CLAMPED])
    def test_derivative_of_constant_vanishes(self, boundary):
        """Test derivatives of the constant spline are zero."""
        space = splines.build_space(3, 7, boundary)
        x = np.linspace(0.0, 1.0, 23)
        derivative = splines.collocation_matrix(space, x, 1) @ np.ones(space.dimension)
        np.testing.assert_allclose(derivative, 0.0, atol=1e-11)

    def test_out_of_domain_point_raises(self):
        """Test clamped spaces reject points outside [a, b]."""
        space = splines.build_space(2, 4, CLAMPED)
        with pytest.raises(DomainError):
            splines.collocation_matrix(space, [1.5])

    def test_periodic_points_wrap(self):
        """Test periodic spaces evaluate x + L like x."""
        space = splines.build_space(2, 6, PERIODIC, (0.0, 2.0))
        coeffs = np.arange(space.dimension, dtype=float)
        inside = splines.collocation_matrix(space, [0.3]) @ coeffs
        wrapped = splines.collocation_matrix(space, [2.3]) @ coeffs
        np.testing.assert_allclose(inside, wrapped, atol=1e-13)


class TestQuadrature:
    """Test Gauss-Legendre rules mapped to cells."""

    def test_single_point_rule_is_midpoint(self):
        """Test one node per cell on [0, 1] with two cells."""
        space = splines.build_space(0, 2, PERIODIC)
        grid = splines.quadrature_grid(space, 1)
        np.testing.assert_allclose(grid.nodes, [[0.25], [0.75]])
        np.testing.assert_allclose(grid.weights, [[0.5], [0.5]])

    def test_cubic_integrated_exactly(self):
        """Test two nodes per cell integrate x^3 over [0, 1] exactly."""
        space = splines.build_space(1, 3, CLAMPED)
        grid = splines.quadrature_grid(space, 2)
        assert np.sum(grid.flat_weights * grid.points ** 3) == pytest.approx(0.25, abs=1e-14)

    @pytest.mark.parametrize("n_gauss", [1, 2, 3, 5])
    def test_weights_sum_to_cell_length(self, n_gauss):
        """Test per-cell weights add up to the cell length."""
        space = splines.build_space(2, 5, PERIODIC, (0.0, 2.0))
        grid = splines.quadrature_grid(space, n_gauss)
        np.testing.assert_allclose(grid.weights.sum(axis=1), 0.4)


class TestOneDimensionalOperators:
    """Test derivative, interpolation and histopolation matrices."""

    @pytest.mark.parametrize("degree,n_cells,boundary", [
        (1, 6, PERIODIC),
        (3, 6, PERIODIC),
        (1, 5, CLAMPED),
        (3, 5, CLAMPED),
    ])
    def test_derivative_matrix_differentiates(self, degree, n_cells, boundary, rng):
        """Test d/dx of an S_{p+1} spline equals the S_p spline with coefficients D c."""
        high = splines.build_space(degree + 1, n_cells, boundary, (0.0, 3.0))
        low = splines.build_space(degree, n_cells, boundary, (0.0, 3.0))
        c = rng.standard_normal(high.dimension)
        x = np.linspace(0.01, 2.99, 41)
        exact = splines.collocation_matrix(high, x, 1) @ c
        via_matrix = splines.collocation_matrix(low, x) @ (splines.derivative_matrix(high, low) @ c)
        np.testing.assert_allclose(via_matrix, exact, atol=1e-10)

    @pytest.mark.parametrize("boundary", [PERIODIC, CLAMPED])
    def test_interpolation_reproduces_splines(self, boundary, rng):
        """Test interpolation at Greville points is the identity on the space."""
        space = splines.build_space(2, 7, boundary)
        c = rng.standard_normal(space.dimension)
        values = splines.collocation_matrix(space, space.greville) @ c
        recovered = np.linalg.solve(splines.interpolation_matrix(space), values)
        np.testing.assert_allclose(recovered, c, atol=1e-10)

    @pytest.mark.parametrize("boundary", [PERIODIC, CLAMPED])
    def test_histopolation_matrix_is_nonsingular(self, boundary):
        """Test the histopolation problem on S_p is uniquely solvable."""
        high = splines.build_space(3, 6, boundary)
        low = splines.build_space(2, 6, boundary)
        matrix = splines.histopolation_matrix(high, low, 4)
        assert matrix.shape == (low.dimension, low.dimension)
        assert np.linalg.cond(matrix) < 1e8
