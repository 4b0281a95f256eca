"""
Tests for the discrete de Rham complex and its commuting projectors.
"""
import math

import numpy as np
import pytest
from numpy.polynomial import polynomial as P

from src.domain.exceptions import ConfigurationError, SpaceMismatchError
from src.domain.services.derham import build_complex
from src.domain.services.projectors import Projectors
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.spline_space import Boundary

PERIODIC, CLAMPED = Boundary.PERIODIC, Boundary.CLAMPED
TWO_PI = 2.0 * math.pi


class TestComplexLayout:
    """Test dimensions and block layout."""

    def test_v3_dimension_of_periodic_1d(self):
        """Test V3 of a 128-cell periodic quadratic complex has 128 DOFs."""
        c = build_complex((2,), (128,), (PERIODIC,))
        assert c.dimension(SpaceTag.V3) == 128
        assert c.dimension(SpaceTag.V0) == 128

    def test_block_shapes_clamped(self, complex_2d_clamped):
        """Test S_{p+1} has n+p+1 and S_p has n+p functions along a clamped axis."""
        shapes = complex_2d_clamped.block_shapes(SpaceTag.V1)
        # p = 1: periodic x has 6 functions, clamped y has 8 (high) or 7 (low)
        assert shapes == [(6, 8, 1), (6, 7, 1), (6, 8, 1)]
        assert complex_2d_clamped.dimension(SpaceTag.X) == 3 * 6 * 8

    def test_trivial_directions(self, complex_1d):
        """Test missing directions collapse to one constant function."""
        description = complex_1d.describe()
        assert description["dim"] == 1
        assert description["trivial"] == [False, True, True]
        assert complex_1d.volume == pytest.approx(1.0)

    def test_split_rejects_wrong_size(self, complex_1d):
        """Test split checks the coefficient count."""
        with pytest.raises(ConfigurationError):
            complex_1d.split(SpaceTag.V1, np.zeros(3))

    @pytest.mark.parametrize("degrees,cells,boundaries", [
        ((), (), ()),
        ((1, 1, 1, 1), (4, 4, 4, 4), (PERIODIC,) * 4),
        ((1, 1), (4,), (PERIODIC, PERIODIC)),
    ])
    def test_invalid_geometry(self, degrees, cells, boundaries):
        """Test inconsistent geometry lists raise ConfigurationError."""
        with pytest.raises(ConfigurationError):
            build_complex(degrees, cells, boundaries)

    def test_essential_mask_only_on_clamped_axis(self, complex_2d_clamped):
        """Test boundary DOFs of X are fixed only at the clamped ends."""
        mask = complex_2d_clamped.essential_mask(SpaceTag.X)
        first = mask[: 6 * 8].reshape(6, 8)
        assert first[:, 0].all() and first[:, -1].all()
        assert not first[:, 1:-1].any()
        assert not complex_2d_clamped.essential_mask(SpaceTag.V3).any()


class TestExactSequence:
    """Test the differentials form a complex."""

    @pytest.mark.parametrize("fixture", [
        "complex_1d", "complex_1d_clamped", "complex_2d", "complex_2d_clamped", "complex_3d",
    ])
    def test_curl_grad_and_div_curl_vanish(self, fixture, request):
        """Test C G = 0 and D C = 0 as sparse matrices."""
        c = request.getfixturevalue(fixture)
        assert abs(c.C @ c.G).max() <= 1e-10
        assert abs(c.D @ c.C).max() <= 1e-10

    def test_field_operators_check_spaces(self, complex_1d):
        """Test grad/curl/div reject fields of the wrong space."""
        with pytest.raises(SpaceMismatchError):
            complex_1d.curl(complex_1d.zeros(SpaceTag.V0))

    def test_gradient_converges(self):
        """Test grad of Pi^0(sin) approaches cos under refinement."""
        errors = []
        for n in (8, 16):
            c = build_complex((2,), (n,), (PERIODIC,), ((0.0, TWO_PI),))
            f = Projectors(c).project_0(lambda x, y, z: np.sin(x))
            gx = c.evaluate(SpaceTag.V1, c.G @ f.coeffs)[0]
            x = c.quad_mesh()[0]
            errors.append(np.sqrt(c.integrate((gx - np.cos(x)) ** 2)))
        assert errors[1] < errors[0] / 4.0


class TestProjectors:
    """Test the commuting projectors."""

    def test_divergence_free_field_projects_divergence_free(self, complex_2d, projectors_2d):
        """Test D Pi^2 F = 0 for F = (-sin y, sin 2x, 0)."""
        b = projectors_2d.project_2(
            lambda x, y, z: (-np.sin(y), np.sin(2.0 * x), np.zeros_like(x)))
        assert np.max(np.abs(complex_2d.D @ b.coeffs)) <= 1e-11

    @pytest.mark.parametrize("fixture", ["complex_1d", "complex_2d", "complex_2d_clamped"])
    def test_constants_reproduced(self, fixture, request):
        """Test Pi^3 and Pi^X reproduce constants exactly."""
        c = request.getfixturevalue(fixture)
        p = Projectors(c)
        rho = p.project_3(lambda x, y, z: np.full(np.shape(x), 2.5))
        np.testing.assert_allclose(rho.coeffs, 2.5, atol=1e-12)
        u = p.project_x(lambda x, y, z: (np.full(np.shape(x), 1.0), np.full(np.shape(x), -2.0),
                                         np.full(np.shape(x), 0.5)))
        blocks = c.split(SpaceTag.X, u.coeffs)
        for block, value in zip(blocks, (1.0, -2.0, 0.5)):
            np.testing.assert_allclose(block, value, atol=1e-12)

    def test_zero_function_projects_to_zero(self, projectors_2d):
        """Test Pi^2(0) = 0."""
        b = projectors_2d.project_2(lambda x, y, z: (np.zeros_like(x),) * 3)
        assert not np.any(b.coeffs)

    def test_interpolation_is_idempotent(self, complex_2d, projectors_2d, rng):
        """Test Pi^0 of a spline in V0 returns its coefficients."""
        coeffs = rng.standard_normal(complex_2d.dimension(SpaceTag.V0))
        points = [axis.points for axis in projectors_2d.grid(SpaceTag.V0, 0).axes]
        values = complex_2d.evaluate_at(SpaceTag.V0, coeffs, points)
        projected = projectors_2d.project_values(SpaceTag.V0, values)
        np.testing.assert_allclose(projected.coeffs, coeffs, atol=1e-10)

    def test_histopolation_is_idempotent(self, complex_1d, projectors_1d, rng):
        """Test Pi^3 of a spline in V3 returns its coefficients."""
        coeffs = rng.standard_normal(complex_1d.dimension(SpaceTag.V3))
        field = Field(SpaceTag.V3, coeffs)
        projected = projectors_1d.project_3(
            lambda x, y, z: complex_1d.evaluate_at(
                SpaceTag.V3, field.coeffs, [x[:, 0, 0], y[0, :, 0], z[0, 0, :]])[0])
        np.testing.assert_allclose(projected.coeffs, coeffs, atol=1e-10)


class TestProductOperators:
    """Test matrix-free product operators against their transposes."""

    def test_flux_operator_transpose(self, complex_2d, projectors_2d, rng):
        """Test w . (K v) = (K^T w) . v."""
        rho = projectors_2d.project_3(lambda x, y, z: 1.0 + 0.3 * np.sin(x + y))
        flux = projectors_2d.flux_operator(rho)
        v = rng.standard_normal(complex_2d.dimension(SpaceTag.X))
        w = rng.standard_normal(complex_2d.dimension(SpaceTag.V2))
        assert w @ flux.apply(v) == pytest.approx(flux.apply_transpose(w) @ v, rel=1e-10)

    def test_cross_operator_transpose(self, complex_2d, projectors_2d, rng):
        """Test w . (Q v) = (Q^T w) . v."""
        b = projectors_2d.project_2(lambda x, y, z: (-np.sin(y), np.sin(2.0 * x), 0.3 + 0.0 * x))
        cross = projectors_2d.cross_operator(b)
        v = rng.standard_normal(complex_2d.dimension(SpaceTag.X))
        w = rng.standard_normal(complex_2d.dimension(SpaceTag.V1))
        assert w @ cross.apply(v) == pytest.approx(cross.apply_transpose(w) @ v, rel=1e-10)

    def test_flux_of_unit_density_is_projection(self, complex_1d, projectors_1d):
        """Test Pi^2(1 v) of a constant v is the constant V2 field."""
        one = projectors_1d.project_3(lambda x, y, z: np.ones_like(x))
        v = projectors_1d.project_x(lambda x, y, z: (np.full(np.shape(x), 0.7),) * 3)
        flux = projectors_1d.flux_operator(one).apply(v.coeffs)
        np.testing.assert_allclose(flux, 0.7, atol=1e-12)

    def test_cross_product_of_parallel_fields_vanishes(self, projectors_1d, complex_1d):
        """Test Pi^1(B x v) = 0 for v parallel to a constant B."""
        b = projectors_1d.project_2(lambda x, y, z: (np.full(np.shape(x), 1.0),
                                                     np.full(np.shape(x), 2.0),
                                                     np.zeros_like(x)))
        v = projectors_1d.project_x(lambda x, y, z: (np.full(np.shape(x), 0.5),
                                                     np.full(np.shape(x), 1.0),
                                                     np.zeros_like(x)))
        result = projectors_1d.cross_operator(b).apply(v.coeffs)
        np.testing.assert_allclose(result, 0.0, atol=1e-12)


def random_polynomial(rng, degree: int = 3) -> np.ndarray:
    """Coefficients c[i, j, k] of a polynomial of total degree <= degree."""
    coeffs = rng.standard_normal((degree + 1,) * 3)
    i, j, k = np.indices(coeffs.shape)
    coeffs[i + j + k > degree] = 0.0
    return coeffs


def polynomial(coeffs):
    return lambda x, y, z: P.polyval3d(x, y, z, coeffs)


def partial(coeffs, axis: int) -> np.ndarray:
    """d/dx_axis, zero-padded back to the shape of coeffs."""
    pad = [(0, 0)] * 3
    pad[axis] = (0, 1)
    return np.pad(P.polyder(coeffs, axis=axis), pad)


class TestCommutingDiagrams:
    """Test G Pi^0 = Pi^1 grad, C Pi^1 = Pi^2 curl and D Pi^2 = Pi^3 div on 8^3 cells."""

    TOL = 1e-10

    @pytest.fixture(scope="class", params=[1, 2])
    def box(self, request):
        c = build_complex((request.param,) * 3, (8, 8, 8), (CLAMPED,) * 3)
        return c, Projectors(c)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_gradient_commutes(self, box, seed):
        """Test G Pi^0 f = Pi^1 grad f for a random cubic f."""
        c, p = box
        f = random_polynomial(np.random.default_rng(seed))
        grad = [polynomial(partial(f, axis)) for axis in range(3)]
        left = c.G @ p.project_0(polynomial(f)).coeffs
        right = p.project_1(grad).coeffs
        np.testing.assert_allclose(left, right, atol=self.TOL)

    @pytest.mark.parametrize("seed", [2, 3])
    def test_curl_commutes(self, box, seed):
        """Test C Pi^1 A = Pi^2 curl A for a random cubic A."""
        c, p = box
        rng = np.random.default_rng(seed)
        ax, ay, az = (random_polynomial(rng) for _ in range(3))
        curl = [
            polynomial(partial(az, 1) - partial(ay, 2)),
            polynomial(partial(ax, 2) - partial(az, 0)),
            polynomial(partial(ay, 0) - partial(ax, 1)),
        ]
        left = c.C @ p.project_1([polynomial(ax), polynomial(ay), polynomial(az)]).coeffs
        right = p.project_2(curl).coeffs
        np.testing.assert_allclose(left, right, atol=self.TOL)

    @pytest.mark.parametrize("seed", [4, 5])
    def test_divergence_commutes(self, box, seed):
        """Test D Pi^2 B = Pi^3 div B for a random cubic B."""
        c, p = box
        rng = np.random.default_rng(seed)
        bx, by, bz = (random_polynomial(rng) for _ in range(3))
        div = partial(bx, 0) + partial(by, 1) + partial(bz, 2)
        left = c.D @ p.project_2([polynomial(bx), polynomial(by), polynomial(bz)]).coeffs
        right = p.project_3(polynomial(div)).coeffs
        np.testing.assert_allclose(left, right, atol=self.TOL)

    def test_complex_identities(self, box):
        """Test C G = 0 and D C = 0 on the 8^3 complex."""
        c, _ = box
        assert abs(c.C @ c.G).max() <= self.TOL
        assert abs(c.D @ c.C).max() <= self.TOL

    def test_periodic_gradient_commutes(self):
        """Test G Pi^0 f = Pi^1 grad f for a trigonometric f on a periodic 2D complex."""
        c = build_complex((2, 2), (12, 12), (PERIODIC,) * 2, ((0.0, TWO_PI),) * 2)
        p = Projectors(c)
        f = p.project_0(lambda x, y, z: np.sin(x) * np.cos(y))
        grad = p.project_1(lambda x, y, z: (
            np.cos(x) * np.cos(y), -np.sin(x) * np.sin(y), np.zeros_like(x)))
        # histopolation integrates trigonometric edges with Gauss quadrature
        np.testing.assert_allclose(c.G @ f.coeffs, grad.coeffs, atol=1e-8)


class TestHarmonicForms:
    """Test the cohomology of the discrete complex through matrix ranks."""

    @staticmethod
    def betti_numbers(c):
        rank_g = np.linalg.matrix_rank(c.G.toarray())
        rank_c = np.linalg.matrix_rank(c.C.toarray())
        rank_d = np.linalg.matrix_rank(c.D.toarray())
        dims = [c.dimension(tag) for tag in (SpaceTag.V0, SpaceTag.V1, SpaceTag.V2, SpaceTag.V3)]
        return (dims[0] - rank_g, dims[1] - rank_c - rank_g,
                dims[2] - rank_d - rank_c, dims[3] - rank_d)

    def test_periodic_box_is_a_torus(self, complex_3d):
        """Test the triply periodic complex has Betti numbers (1, 3, 3, 1)."""
        assert self.betti_numbers(complex_3d) == (1, 3, 3, 1)

    def test_clamped_box_is_contractible(self):
        """Test the clamped cube has Betti numbers (1, 0, 0, 0)."""
        c = build_complex((1, 1, 1), (4, 4, 4), (CLAMPED,) * 3)
        assert self.betti_numbers(c) == (1, 0, 0, 0)


class TestProjectorIdempotence:
    """Test Pi^k restricted to V^k is the identity."""

    @pytest.mark.parametrize("tag", [SpaceTag.V1, SpaceTag.V2])
    @pytest.mark.parametrize("fixture", ["complex_2d", "complex_2d_clamped", "complex_3d"])
    def test_projecting_a_spline_returns_it(self, tag, fixture, request, rng):
        """Test Pi^1 and Pi^2 of random splines return their coefficients."""
        c = request.getfixturevalue(fixture)
        p = Projectors(c)
        coeffs = rng.standard_normal(c.dimension(tag))
        values = [p.sample_block(tag, coeffs, block, tag, block) for block in range(c.n_blocks(tag))]
        np.testing.assert_allclose(p.project_values(tag, values).coeffs, coeffs, atol=1e-10)
