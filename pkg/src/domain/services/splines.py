"""
Univariate B-spline machinery: knots, basis evaluation, Greville abscissae,
Gauss quadrature grids and the 1D matrices the de Rham complex is built from.

The evaluation kernels follow the Cox–de Boor recursion of The NURBS Book
(Algorithms A2.1/A2.2), vectorized over evaluation points.
"""
import logging
from typing import List, Tuple

import numpy as np
import scipy.sparse as sp

from src.domain.exceptions import ConfigurationError, DomainError
from src.domain.value_objects.spline_space import Boundary, QuadratureGrid, SplineSpace1D

logger = logging.getLogger(__name__)

# Points closer than this (relative to the interval length) to the domain are
# treated as lying on its boundary.
_DOMAIN_TOL = 1e-12


def build_space(degree: int, n_cells: int, boundary: Boundary,
                interval: Tuple[float, float] = (0.0, 1.0)) -> SplineSpace1D:
    """Build a uniform spline space of maximum regularity."""
    if degree < 0:
        raise ConfigurationError(f"spline degree must be >= 0, got {degree}")
    if n_cells < 1:
        raise ConfigurationError(f"number of cells must be >= 1, got {n_cells}")
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ConfigurationError(f"invalid interval [{a}, {b}]")
    boundary = Boundary(boundary)
    if boundary is Boundary.PERIODIC and n_cells <= degree:
        raise ConfigurationError(
            f"periodic space needs n_cells > degree (n_cells={n_cells}, degree={degree})"
        )

    knots = make_knots(np.linspace(a, b, n_cells + 1), degree, boundary is Boundary.PERIODIC)
    greville = _greville(knots, degree, n_cells, boundary is Boundary.PERIODIC, (a, b))
    return SplineSpace1D(
        degree=degree,
        n_cells=n_cells,
        boundary=boundary,
        domain=(a, b),
        knots=knots,
        greville=greville,
    )


def make_knots(breaks: np.ndarray, degree: int, periodic: bool) -> np.ndarray:
    """Knot sequence from breakpoints: extended by periodicity or clamped."""
    n = len(breaks)
    knots = np.empty(n + 2 * degree)
    knots[degree:degree + n] = breaks
    if periodic:
        period = breaks[-1] - breaks[0]
        for i in range(degree):
            knots[i] = breaks[n - degree - 1 + i] - period
            knots[len(knots) - 1 - i] = breaks[degree - i] + period
    else:
        knots[:degree] = breaks[0]
        knots[degree + n:] = breaks[-1]
    return knots


def _greville(knots, degree, n_cells, periodic, domain) -> np.ndarray:
    a, b = domain
    if degree == 0:
        # cell midpoints
        breaks = np.linspace(a, b, n_cells + 1)
        return 0.5 * (breaks[:-1] + breaks[1:])

    n = n_cells if periodic else n_cells + degree
    points = np.array([knots[i + 1:i + 1 + degree].sum() / degree for i in range(n)])
    if periodic:
        points = a + np.mod(points - a, b - a)
        points.sort()
    points[0] = max(points[0], a)
    points[-1] = min(points[-1], b)
    return points


def greville_points(space: SplineSpace1D) -> np.ndarray:
    """Interpolation sites of the space, one per basis function."""
    return space.greville.copy()


def find_spans(space: SplineSpace1D, x: np.ndarray) -> np.ndarray:
    """Knot span index of every point (points must already lie in [a, b])."""
    p = space.degree
    knots = space.knots
    spans = np.searchsorted(knots, x, side="right") - 1
    return np.clip(spans, p, len(knots) - p - 2)


def _prepare_points(space: SplineSpace1D, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if space.periodic:
        return space.wrap(x)
    a, b = space.domain
    tol = _DOMAIN_TOL * space.length
    if np.any(x < a - tol) or np.any(x > b + tol):
        raise DomainError(f"points outside the spline domain [{a}, {b}]")
    return np.clip(x, a, b)


def basis_funs(knots: np.ndarray, degree: int, x: np.ndarray, spans: np.ndarray) -> np.ndarray:
    """Non-vanishing B-splines at every point, shape (len(x), degree + 1)."""
    m = len(x)
    out = np.zeros((m, degree + 1))
    out[:, 0] = 1.0
    left = np.zeros((m, degree))
    right = np.zeros((m, degree))
    for j in range(degree):
        left[:, j] = x - knots[spans - j]
        right[:, j] = knots[spans + 1 + j] - x
        saved = np.zeros(m)
        for r in range(j + 1):
            temp = out[:, r] / (right[:, r] + left[:, j - r])
            out[:, r] = saved + right[:, r] * temp
            saved = left[:, j - r] * temp
        out[:, j + 1] = saved
    return out


def basis_funs_1st_der(knots: np.ndarray, degree: int, x: np.ndarray,
                       spans: np.ndarray) -> np.ndarray:
    """First derivative of the non-vanishing B-splines, shape (len(x), degree + 1)."""
    m = len(x)
    out = np.zeros((m, degree + 1))
    if degree == 0:
        return out
    values = basis_funs(knots, degree - 1, x, spans)
    saved = degree * values[:, 0] / (knots[spans + 1] - knots[spans + 1 - degree])
    out[:, 0] = -saved
    for j in range(1, degree):
        temp = saved
        saved = degree * values[:, j] / (knots[spans + j + 1] - knots[spans + j + 1 - degree])
        out[:, j] = temp - saved
    out[:, degree] = saved
    return out


def _local_values(space: SplineSpace1D, x: np.ndarray, deriv_order: int):
    spans = find_spans(space, x)
    if deriv_order == 0:
        values = basis_funs(space.knots, space.degree, x, spans)
    elif deriv_order == 1:
        values = basis_funs_1st_der(space.knots, space.degree, x, spans)
    else:
        raise ConfigurationError(f"deriv_order must be 0 or 1, got {deriv_order}")
    offsets = np.arange(space.degree + 1)
    indices = spans[:, None] - space.degree + offsets[None, :]
    if space.periodic:
        indices = np.mod(indices, space.dimension)
    return indices, values


def eval_basis(space: SplineSpace1D, x: float, deriv_order: int = 0) -> List[Tuple[int, float]]:
    """
    Evaluate the degree+1 nonzero basis functions (or derivatives) at x.

    Raises DomainError when x lies outside [a, b], for periodic spaces too.
    """
    a, b = space.domain
    tol = _DOMAIN_TOL * space.length
    if not (a - tol <= x <= b + tol):
        raise DomainError(f"x={x} outside the spline domain [{a}, {b}]")
    points = _prepare_points(space, [min(max(x, a), b)])
    indices, values = _local_values(space, points, deriv_order)
    return [(int(i), float(v)) for i, v in zip(indices[0], values[0])]


def collocation_matrix(space: SplineSpace1D, x, deriv_order: int = 0) -> sp.csr_matrix:
    """
    Sparse matrix E with E[k, j] = N_j^(deriv_order)(x_k).

    Periodic spaces accept any real x (wrapped); clamped spaces require x in [a, b].
    """
    points = _prepare_points(space, x)
    indices, values = _local_values(space, points, deriv_order)
    m = len(points)
    rows = np.repeat(np.arange(m), space.degree + 1)
    # duplicate (row, col) pairs only occur for wrapped indices of tiny periodic
    # spaces; csr conversion sums them, which is the correct periodic basis
    matrix = sp.coo_matrix((values.ravel(), (rows, indices.ravel())), shape=(m, space.dimension))
    return matrix.tocsr()


def gauss_legendre(n_gauss: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss–Legendre rule on [-1, 1]."""
    if n_gauss < 1:
        raise ConfigurationError(f"n_gauss must be >= 1, got {n_gauss}")
    return np.polynomial.legendre.leggauss(n_gauss)


def map_rule(nodes: np.ndarray, weights: np.ndarray, left: np.ndarray, right: np.ndarray):
    """Map a reference rule onto intervals [left_i, right_i]; returns (n_int, n_gauss) arrays."""
    half = 0.5 * (np.asarray(right) - np.asarray(left))
    mid = 0.5 * (np.asarray(right) + np.asarray(left))
    return mid[:, None] + half[:, None] * nodes[None, :], half[:, None] * weights[None, :]


def quadrature_grid(space: SplineSpace1D, n_gauss: int) -> QuadratureGrid:
    """Gauss–Legendre nodes and weights on every knot cell of the space."""
    x, w = gauss_legendre(n_gauss)
    breaks = space.breaks
    nodes, weights = map_rule(x, w, breaks[:-1], breaks[1:])
    return QuadratureGrid(nodes=nodes, weights=weights)


def derivative_matrix(high: SplineSpace1D, low: SplineSpace1D) -> sp.csr_matrix:
    """
    Strong derivative S_{q} -> S_{q-1} in B-spline coefficients.

    d/dx N_i^q = c_i N_{i-1}^{q-1} - c_{i+1} N_i^{q-1},  c_i = q / (t_{i+q} - t_i).
    A trivial direction (both factors of degree 0) has the zero derivative.
    """
    if high.degree == low.degree == 0:
        return sp.csr_matrix((low.dimension, high.dimension))
    if high.degree != low.degree + 1 or high.n_cells != low.n_cells:
        raise ConfigurationError("derivative needs spaces of degree q and q-1 on the same cells")

    q = high.degree
    t = high.knots
    n_high = high.dimension
    n_low = low.dimension
    rows, cols, vals = [], [], []
    if high.periodic:
        h = high.cell_size
        for i in range(n_high):
            rows += [(i - 1) % n_low, i % n_low]
            cols += [i, i]
            vals += [1.0 / h, -1.0 / h]
    else:
        def coefficient(i):
            span = t[i + q] - t[i]
            return q / span if span > 0.0 else 0.0

        for i in range(n_high):
            if i >= 1:
                rows.append(i - 1)
                cols.append(i)
                vals.append(coefficient(i))
            if i <= n_low - 1:
                rows.append(i)
                cols.append(i)
                vals.append(-coefficient(i + 1))
    return sp.coo_matrix((vals, (rows, cols)), shape=(n_low, n_high)).tocsr()


def histopolation_segments(space: SplineSpace1D) -> Tuple[np.ndarray, np.ndarray]:
    """Intervals between consecutive Greville points (with the wrap interval if periodic)."""
    g = space.greville
    if space.periodic:
        left = g
        right = np.append(g[1:], g[0] + space.length)
    else:
        left = g[:-1]
        right = g[1:]
    return left, right


def segment_quadrature(space: SplineSpace1D, n_gauss: int):
    """
    Quadrature over the histopolation segments of `space`, split at breakpoints.

    Returns (points, weights, reduction) where `reduction` is a sparse
    (n_segments x n_points) matrix summing weighted samples per segment.
    """
    left, right = histopolation_segments(space)
    x, w = gauss_legendre(n_gauss)
    h = space.cell_size
    a = space.domain[0]
    points, weights, owner = [], [], []
    for k, (lo, hi) in enumerate(zip(left, right)):
        # breakpoints strictly inside the segment, periodic copies included
        first = np.floor((lo - a) / h + 1e-12) + 1
        last = np.ceil((hi - a) / h - 1e-12) - 1
        inner = a + h * np.arange(first, last + 1)
        cuts = np.concatenate(([lo], inner, [hi]))
        nodes, wts = map_rule(x, w, cuts[:-1], cuts[1:])
        points.append(nodes.ravel())
        weights.append(wts.ravel())
        owner.append(np.full(wts.size, k))
    points = np.concatenate(points)
    weights = np.concatenate(weights)
    owner = np.concatenate(owner)
    reduction = sp.coo_matrix(
        (weights, (owner, np.arange(len(points)))), shape=(len(left), len(points))
    ).tocsr()
    return points, weights, reduction


def interpolation_matrix(space: SplineSpace1D) -> np.ndarray:
    """Dense I[i, j] = N_j(g_i) at the Greville points."""
    return collocation_matrix(space, space.greville).toarray()


def histopolation_matrix(high: SplineSpace1D, low: SplineSpace1D, n_gauss: int) -> np.ndarray:
    """Dense H[i, j] = integral of N_j (of `low`) over the i-th Greville cell of `high`."""
    points, _, reduction = segment_quadrature(high, n_gauss)
    return (reduction @ collocation_matrix(low, points)).toarray()
