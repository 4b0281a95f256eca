"""
Commuting projectors of the spline complex.

Degree-(p+1) directions carry interpolation degrees of freedom (values at the
Greville points of S_{p+1}); degree-p directions carry histopolation degrees
of freedom (integrals between consecutive Greville points). Every projector
is a Kronecker product of 1D operators, so it is applied mode-wise with small
dense LU factors and never assembled.
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, List, Optional, Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.linalg import lu_factor, lu_solve

from src.domain.exceptions import SolverError
from src.domain.services import splines
from src.domain.services.derham import HIGH, LOW, DeRhamComplex
from src.domain.services.tensor import kron_apply
from src.domain.value_objects.field import Field, SpaceTag

logger = logging.getLogger(__name__)

ScalarFunction = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
VectorFunction = Union[Callable[..., Sequence[np.ndarray]], Sequence[ScalarFunction]]


@dataclass(frozen=True, eq=False)
class DofAxis:
    """Degrees of freedom of one factor along one axis."""

    points: np.ndarray
    reduction: Optional[sp.csr_matrix]  # None for point values
    factor: tuple

    @property
    def size(self) -> int:
        return self.factor[0].shape[0]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.factor, rhs)

    def solve_transpose(self, rhs: np.ndarray) -> np.ndarray:
        return lu_solve(self.factor, rhs, trans=1)


class DofGrid:
    """Tensor product of three DofAxis objects: the DOFs of one block."""

    def __init__(self, axes: Sequence[DofAxis]):
        self.axes = tuple(axes)

    @property
    def shape(self):
        return tuple(len(a.points) for a in self.axes)

    def reduce(self, values: np.ndarray) -> np.ndarray:
        """Point samples -> degrees of freedom (segment integrals where needed)."""
        return kron_apply([a.reduction for a in self.axes], values)

    def reduce_transpose(self, dofs: np.ndarray) -> np.ndarray:
        ops = [None if a.reduction is None else a.reduction.T for a in self.axes]
        return kron_apply(ops, dofs)

    def solve(self, dofs: np.ndarray) -> np.ndarray:
        return kron_apply([a.solve for a in self.axes], dofs)

    def solve_transpose(self, coeffs: np.ndarray) -> np.ndarray:
        return kron_apply([a.solve_transpose for a in self.axes], coeffs)


class Projectors:
    """
    Interpolation/histopolation projectors onto V0..V3 and X.

    Pointwise products of discrete fields (rho*v, B x v, the velocity bracket)
    are projected by sampling at the DOF points of the target block.
    """

    def __init__(self, complex_: DeRhamComplex):
        self.complex = complex_
        self._axes = {}
        for d, direction in enumerate(complex_.directions):
            self._axes[(d, HIGH)] = self._interpolation_axis(direction)
            self._axes[(d, LOW)] = self._histopolation_axis(direction)

    @staticmethod
    def _factor(matrix: np.ndarray, what: str) -> tuple:
        lu, piv = lu_factor(matrix)
        if np.min(np.abs(np.diag(lu))) < 1e-14 * max(1.0, np.max(np.abs(lu))):
            raise SolverError(f"singular {what} matrix")
        return lu, piv

    def _interpolation_axis(self, direction) -> DofAxis:
        space = direction.high
        return DofAxis(
            points=space.greville.copy(),
            reduction=None,
            factor=self._factor(splines.interpolation_matrix(space), "interpolation"),
        )

    def _histopolation_axis(self, direction) -> DofAxis:
        n_gauss = 1 if direction.trivial else direction.low.degree + 2
        points, _, reduction = splines.segment_quadrature(direction.high, n_gauss)
        if direction.high.periodic:
            points = direction.high.wrap(points)
        matrix = (reduction @ splines.collocation_matrix(direction.low, points)).toarray()
        return DofAxis(points=points, reduction=reduction,
                       factor=self._factor(matrix, "histopolation"))

    # ------------------------------------------------------------------ grids

    def grid(self, tag: SpaceTag, block: int) -> DofGrid:
        kinds = self.complex.kinds(tag, block)
        return DofGrid([self._axes[(d, kinds[d])] for d in range(3)])

    def mesh(self, tag: SpaceTag, block: int):
        return np.meshgrid(*(a.points for a in self.grid(tag, block).axes), indexing="ij")

    @lru_cache(maxsize=None)
    def _collocation(self, d: int, grid_kind: str, source_kind: str, deriv: int) -> sp.csr_matrix:
        direction = self.complex.directions[d]
        points = self._axes[(d, grid_kind)].points
        return splines.collocation_matrix(direction.space(source_kind), points, deriv)

    def sample(self, source: SpaceTag, coeffs: np.ndarray, target: SpaceTag, block: int,
               deriv_axis: Optional[int] = None) -> List[np.ndarray]:
        """Values of every block of a `source` field at the DOF points of (target, block)."""
        return [
            self._sample_tensor(source, b, tensor, target, block, deriv_axis)
            for b, tensor in enumerate(self.complex.split(source, coeffs))
        ]

    def sample_block(self, source: SpaceTag, coeffs: np.ndarray, source_block: int,
                     target: SpaceTag, block: int) -> np.ndarray:
        tensor = self.complex.split(source, coeffs)[source_block]
        return self._sample_tensor(source, source_block, tensor, target, block, None)

    def _sample_tensor(self, source, source_block, tensor, target, block, deriv_axis):
        grid_kinds = self.complex.kinds(target, block)
        kinds = self.complex.kinds(source, source_block)
        ops = [self._collocation(d, grid_kinds[d], kinds[d], int(deriv_axis == d))
               for d in range(3)]
        return kron_apply(ops, tensor)

    def sample_transpose(self, source: SpaceTag, block_values: Sequence[Optional[np.ndarray]],
                         target: SpaceTag, block: int) -> np.ndarray:
        """Adjoint of `sample`: point values on (target, block) -> source coefficients."""
        grid_kinds = self.complex.kinds(target, block)
        out = []
        for b, values in enumerate(block_values):
            kinds = self.complex.kinds(source, b)
            if values is None:
                out.append(np.zeros(self.complex.block_shapes(source)[b]))
                continue
            ops = [self._collocation(d, grid_kinds[d], kinds[d], 0).T for d in range(3)]
            out.append(kron_apply(ops, values))
        return self.complex.join(source, out)

    # ------------------------------------------------------- analytic projection

    def project_values(self, tag: SpaceTag, values: Sequence[np.ndarray]) -> Field:
        """Project from point samples given on the DOF grid of every block."""
        blocks = []
        for block, vals in enumerate(values):
            grid = self.grid(tag, block)
            blocks.append(grid.solve(grid.reduce(np.asarray(vals, dtype=float))))
        return Field(tag, self.complex.join(tag, blocks))

    def project(self, tag: SpaceTag, function) -> Field:
        """Pi^k of an analytic scalar (V0, V3) or vector (V1, V2, X) function of (x, y, z)."""
        values = []
        for block in range(self.complex.n_blocks(tag)):
            x, y, z = self.mesh(tag, block)
            if tag in (SpaceTag.V0, SpaceTag.V3):
                values.append(_broadcast(function(x, y, z), x.shape))
            elif callable(function):
                values.append(_broadcast(function(x, y, z)[block], x.shape))
            else:
                values.append(_broadcast(function[block](x, y, z), x.shape))
        return self.project_values(tag, values)

    def project_0(self, function: ScalarFunction) -> Field:
        return self.project(SpaceTag.V0, function)

    def project_1(self, function: VectorFunction) -> Field:
        return self.project(SpaceTag.V1, function)

    def project_2(self, function: VectorFunction) -> Field:
        return self.project(SpaceTag.V2, function)

    def project_3(self, function: ScalarFunction) -> Field:
        return self.project(SpaceTag.V3, function)

    def project_x(self, function: VectorFunction) -> Field:
        return self.project(SpaceTag.X, function)

    # ---------------------------------------------------- V0 interpolation (X)

    def interpolate(self, values: np.ndarray) -> np.ndarray:
        """I0^{-1}: Greville values of one V0 component -> coefficients."""
        return self.grid(SpaceTag.V0, 0).solve(values)

    def interpolate_transpose(self, coeffs: np.ndarray) -> np.ndarray:
        return self.grid(SpaceTag.V0, 0).solve_transpose(coeffs)

    def bracket_covector(self, a: np.ndarray, momentum: np.ndarray) -> np.ndarray:
        """
        Covector v -> m . Pi^0([a, v]) for [a, v] = a.grad(v) - v.grad(a).

        `momentum` is the X covector m = M[rho]_X u; the result is linear in a.
        """
        grid_kinds = self.complex.kinds(SpaceTag.V0, 0)
        y = [self.interpolate_transpose(m) for m in self.complex.split(SpaceTag.X, momentum)]
        values = self.sample(SpaceTag.X, a, SpaceTag.V0, 0)
        derivs = [self.sample(SpaceTag.X, a, SpaceTag.V0, 0, deriv_axis=d) for d in range(3)]
        live = [not direction.trivial for direction in self.complex.directions]

        def transpose(deriv_axis, tensor):
            ops = [self._collocation(d, grid_kinds[d], HIGH, int(deriv_axis == d)).T
                   for d in range(3)]
            return kron_apply(ops, tensor)

        out = []
        for c in range(3):
            # a . grad(v_c) tested against y_c
            block = sum(transpose(d, values[d] * y[c]) for d in range(3) if live[d])
            if live[c]:
                # v_c d_c(a_e) tested against y_e
                block = block - transpose(None, sum(derivs[c][e] * y[e] for e in range(3)))
            out.append(np.zeros(self.complex.block_shapes(SpaceTag.X)[c]) + block)
        return self.complex.join(SpaceTag.X, out)

    # ------------------------------------------------------- product operators

    def flux_operator(self, weight: Field) -> "FluxOperator":
        """v in X  ->  Pi^2(w v) for a V3 weight w (rho or s)."""
        return FluxOperator(self, weight.require(SpaceTag.V3))

    def cross_operator(self, b: Field) -> "CrossOperator":
        """v in X  ->  Pi^1(B x v) for B in V2."""
        return CrossOperator(self, b.require(SpaceTag.V2))


class FluxOperator:
    """K v = Pi^2(w v) and its transpose, matrix-free."""

    def __init__(self, projectors: Projectors, weight: Field):
        self.projectors = projectors
        self.complex = projectors.complex
        # weight sampled once on the DOF grid of each V2 block
        self._weights = [
            projectors.sample(SpaceTag.V3, weight.coeffs, SpaceTag.V2, i)[0] for i in range(3)
        ]

    def apply(self, v: np.ndarray) -> np.ndarray:
        blocks = []
        for i in range(3):
            grid = self.projectors.grid(SpaceTag.V2, i)
            vi = self.projectors.sample_block(SpaceTag.X, v, i, SpaceTag.V2, i)
            blocks.append(grid.solve(grid.reduce(self._weights[i] * vi)))
        return self.complex.join(SpaceTag.V2, blocks)

    def apply_transpose(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(self.complex.dimension(SpaceTag.X))
        for i, wi in enumerate(self.complex.split(SpaceTag.V2, w)):
            grid = self.projectors.grid(SpaceTag.V2, i)
            values = self._weights[i] * grid.reduce_transpose(grid.solve_transpose(wi))
            per_block = [values if b == i else None for b in range(3)]
            out += self.projectors.sample_transpose(SpaceTag.X, per_block, SpaceTag.V2, i)
        return out


class CrossOperator:
    """Q v = Pi^1(B x v) and its transpose, matrix-free."""

    def __init__(self, projectors: Projectors, b: Field):
        self.projectors = projectors
        self.complex = projectors.complex
        self._b = [projectors.sample(SpaceTag.V2, b.coeffs, SpaceTag.V1, i) for i in range(3)]

    def apply(self, v: np.ndarray) -> np.ndarray:
        blocks = []
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grid = self.projectors.grid(SpaceTag.V1, i)
            vs = self.projectors.sample(SpaceTag.X, v, SpaceTag.V1, i)
            b = self._b[i]
            blocks.append(grid.solve(grid.reduce(b[j] * vs[k] - b[k] * vs[j])))
        return self.complex.join(SpaceTag.V1, blocks)

    def apply_transpose(self, w: np.ndarray) -> np.ndarray:
        out = np.zeros(self.complex.dimension(SpaceTag.X))
        for i, wi in enumerate(self.complex.split(SpaceTag.V1, w)):
            j, k = (i + 1) % 3, (i + 2) % 3
            grid = self.projectors.grid(SpaceTag.V1, i)
            z = grid.reduce_transpose(grid.solve_transpose(wi))
            b = self._b[i]
            per_block: List[Optional[np.ndarray]] = [None, None, None]
            per_block[k] = b[j] * z
            per_block[j] = -b[k] * z
            out += self.projectors.sample_transpose(SpaceTag.X, per_block, SpaceTag.V1, i)
        return out


def _broadcast(values, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(values, dtype=float), shape).copy()
