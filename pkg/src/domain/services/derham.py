"""
Tensor-product spline de Rham complex V0 -> V1 -> V2 -> V3 and X = (V0)^3.

Every complex is three-dimensional; unused directions of 1D/2D cases carry a
single periodic cell of degree 0, so their derivative is zero and integrals
over them contribute a factor equal to their length (1).
"""
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from src.domain.exceptions import ConfigurationError
from src.domain.services import splines
from src.domain.services.tensor import kron_apply
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.spline_space import Boundary, SplineSpace1D

logger = logging.getLogger(__name__)

HIGH = "h"  # factor S_{p+1}
LOW = "l"   # factor S_p

# Degree pattern of every block, per direction.
BLOCK_KINDS: Dict[SpaceTag, Tuple[Tuple[str, str, str], ...]] = {
    SpaceTag.V0: ((HIGH, HIGH, HIGH),),
    SpaceTag.V1: ((LOW, HIGH, HIGH), (HIGH, LOW, HIGH), (HIGH, HIGH, LOW)),
    SpaceTag.V2: ((HIGH, LOW, LOW), (LOW, HIGH, LOW), (LOW, LOW, HIGH)),
    SpaceTag.V3: ((LOW, LOW, LOW),),
    SpaceTag.X: ((HIGH, HIGH, HIGH),) * 3,
}


@dataclass(frozen=True, eq=False)
class Direction:
    """The pair (S_{p+1}, S_p) of one direction plus its quadrature."""

    high: SplineSpace1D
    low: SplineSpace1D
    derivative: sp.csr_matrix
    trivial: bool
    quad_points: np.ndarray
    quad_weights: np.ndarray

    def space(self, kind: str) -> SplineSpace1D:
        return self.high if kind == HIGH else self.low

    @property
    def boundary(self) -> Boundary:
        return self.high.boundary

    @property
    def cell_size(self) -> float:
        return self.high.cell_size


def build_direction(degree: int, n_cells: int, boundary: Boundary,
                    interval: Tuple[float, float], n_gauss: Optional[int] = None) -> Direction:
    """Build (S_{degree+1}, S_degree) on one axis."""
    high = splines.build_space(degree + 1, n_cells, boundary, interval)
    low = splines.build_space(degree, n_cells, boundary, interval)
    return _direction(high, low, False, n_gauss or degree + 2)


def trivial_direction() -> Direction:
    """One periodic degree-0 cell on [0, 1]: constant in that direction."""
    space = splines.build_space(0, 1, Boundary.PERIODIC, (0.0, 1.0))
    return _direction(space, space, True, 1)


def _direction(high, low, trivial, n_gauss) -> Direction:
    grid = splines.quadrature_grid(high, n_gauss)
    return Direction(
        high=high,
        low=low,
        derivative=splines.derivative_matrix(high, low),
        trivial=trivial,
        quad_points=grid.points,
        quad_weights=grid.flat_weights,
    )


class DeRhamComplex:
    """
    Discrete de Rham complex on a box.

    Coefficient vectors of multi-block spaces (V1, V2, X) are the
    concatenation of the C-ordered block tensors.
    """

    def __init__(self, directions: Sequence[Direction], dim: int):
        if len(directions) != 3:
            raise ConfigurationError("a complex needs exactly three directions")
        self.directions: Tuple[Direction, ...] = tuple(directions)
        self.dim = dim
        self._shapes = {
            tag: [tuple(d.space(k).dimension for d, k in zip(self.directions, kinds))
                  for kinds in blocks]
            for tag, blocks in BLOCK_KINDS.items()
        }
        self.G = self._grad_matrix()
        self.C = self._curl_matrix()
        self.D = self._div_matrix()
        self.quad_shape = tuple(len(d.quad_points) for d in self.directions)
        wx, wy, wz = (d.quad_weights for d in self.directions)
        self.quad_weights = wx[:, None, None] * wy[None, :, None] * wz[None, None, :]
        logger.debug("built complex", extra={"dims": {t.value: self.dimension(t) for t in SpaceTag}})

    # ------------------------------------------------------------------ layout

    def block_shapes(self, tag: SpaceTag) -> List[Tuple[int, int, int]]:
        return list(self._shapes[tag])

    def block_sizes(self, tag: SpaceTag) -> List[int]:
        return [int(np.prod(s)) for s in self._shapes[tag]]

    def dimension(self, tag: SpaceTag) -> int:
        return sum(self.block_sizes(tag))

    def kinds(self, tag: SpaceTag, block: int) -> Tuple[str, str, str]:
        return BLOCK_KINDS[tag][block]

    def n_blocks(self, tag: SpaceTag) -> int:
        return len(BLOCK_KINDS[tag])

    def split(self, tag: SpaceTag, coeffs: np.ndarray) -> List[np.ndarray]:
        """Flat coefficient vector -> list of block tensors."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.size != self.dimension(tag):
            raise ConfigurationError(
                f"{tag.value} expects {self.dimension(tag)} coefficients, got {coeffs.size}"
            )
        out, start = [], 0
        for shape, size in zip(self._shapes[tag], self.block_sizes(tag)):
            out.append(coeffs[start:start + size].reshape(shape))
            start += size
        return out

    def join(self, tag: SpaceTag, blocks: Sequence[np.ndarray]) -> np.ndarray:
        return np.concatenate([np.asarray(b, dtype=float).ravel() for b in blocks])

    def zeros(self, tag: SpaceTag) -> Field:
        return Field(tag, np.zeros(self.dimension(tag)))

    @property
    def min_cell_size(self) -> float:
        return min(d.cell_size for d in self.directions if not d.trivial)

    @property
    def volume(self) -> float:
        return float(np.prod([d.high.length for d in self.directions]))

    # ------------------------------------------------------------ differentials

    def _identity(self, d: int, kind: str) -> sp.csr_matrix:
        return sp.identity(self.directions[d].space(kind).dimension, format="csr")

    def _partial(self, kinds: Tuple[str, str, str], axis: int) -> sp.csr_matrix:
        """d/d(axis) acting on a block with degree pattern `kinds` (kinds[axis] must be HIGH)."""
        factors = []
        for d, kind in enumerate(kinds):
            if d == axis:
                factors.append(self.directions[d].derivative)
            else:
                factors.append(self._identity(d, kind))
        return sp.kron(sp.kron(factors[0], factors[1]), factors[2], format="csr")

    def _grad_matrix(self) -> sp.csr_matrix:
        kinds = BLOCK_KINDS[SpaceTag.V0][0]
        return sp.vstack([self._partial(kinds, axis) for axis in range(3)], format="csr")

    def _curl_matrix(self) -> sp.csr_matrix:
        v1 = BLOCK_KINDS[SpaceTag.V1]
        shapes2 = self.block_sizes(SpaceTag.V2)
        shapes1 = self.block_sizes(SpaceTag.V1)

        def zero(i, j):
            return sp.csr_matrix((shapes2[i], shapes1[j]))

        # (curl A)_x = dy A_z - dz A_y, and cyclic
        rows = [
            [zero(0, 0), -self._partial(v1[1], 2), self._partial(v1[2], 1)],
            [self._partial(v1[0], 2), zero(1, 1), -self._partial(v1[2], 0)],
            [-self._partial(v1[0], 1), self._partial(v1[1], 0), zero(2, 2)],
        ]
        return sp.bmat(rows, format="csr")

    def _div_matrix(self) -> sp.csr_matrix:
        v2 = BLOCK_KINDS[SpaceTag.V2]
        return sp.hstack([self._partial(v2[axis], axis) for axis in range(3)], format="csr")

    def grad(self, f: Field) -> Field:
        return Field(SpaceTag.V1, self.G @ f.require(SpaceTag.V0).coeffs)

    def curl(self, a: Field) -> Field:
        return Field(SpaceTag.V2, self.C @ a.require(SpaceTag.V1).coeffs)

    def div(self, b: Field) -> Field:
        return Field(SpaceTag.V3, self.D @ b.require(SpaceTag.V2).coeffs)

    # ------------------------------------------------------------- evaluation

    @lru_cache(maxsize=None)
    def _quad_collocation(self, d: int, kind: str, deriv: int) -> sp.csr_matrix:
        direction = self.directions[d]
        return splines.collocation_matrix(direction.space(kind), direction.quad_points, deriv)

    def collocation_at(self, d: int, kind: str, points: np.ndarray, deriv: int = 0) -> sp.csr_matrix:
        """Collocation matrix of one factor at arbitrary points along axis d."""
        return splines.collocation_matrix(self.directions[d].space(kind), points, deriv)

    def evaluate(self, tag: SpaceTag, coeffs: np.ndarray,
                 deriv_axis: Optional[int] = None) -> List[np.ndarray]:
        """
        Values of every block at the quadrature nodes (or of its partial
        derivative along `deriv_axis`), each of shape quad_shape.
        """
        out = []
        for block, tensor in enumerate(self.split(tag, coeffs)):
            kinds = self.kinds(tag, block)
            ops = [self._quad_collocation(d, kinds[d], int(deriv_axis == d)) for d in range(3)]
            out.append(kron_apply(ops, tensor))
        return out

    def evaluate_at(self, tag: SpaceTag, coeffs: np.ndarray, points: Sequence[np.ndarray],
                    deriv_axis: Optional[int] = None) -> List[np.ndarray]:
        """Values of every block on the tensor grid points[0] x points[1] x points[2]."""
        out = []
        for block, tensor in enumerate(self.split(tag, coeffs)):
            kinds = self.kinds(tag, block)
            ops = [self.collocation_at(d, kinds[d], points[d], int(deriv_axis == d))
                   for d in range(3)]
            out.append(kron_apply(ops, tensor))
        return out

    def integrate(self, values: np.ndarray) -> float:
        """Quadrature of nodal values over the box."""
        return float(np.sum(self.quad_weights * values))

    def load_vector(self, tag: SpaceTag, values: Sequence[np.ndarray]) -> np.ndarray:
        """Entries  int g . phi_i  for g given per block at the quadrature nodes."""
        out = []
        for block, g in enumerate(values):
            kinds = self.kinds(tag, block)
            ops = [self._quad_collocation(d, kinds[d], 0).T for d in range(3)]
            out.append(kron_apply(ops, self.quad_weights * g))
        return self.join(tag, out)

    def quad_mesh(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*(d.quad_points for d in self.directions), indexing="ij")

    # ---------------------------------------------------------------- assembly

    @lru_cache(maxsize=None)
    def basis_matrix(self, tag: SpaceTag, block: int, deriv_axis: Optional[int] = None) -> sp.csr_matrix:
        """Sparse (block dimension x quadrature nodes) matrix of basis values."""
        kinds = self.kinds(tag, block)
        mats = [self._quad_collocation(d, kinds[d], int(deriv_axis == d)).T.tocsr() for d in range(3)]
        return sp.kron(sp.kron(mats[0], mats[1]), mats[2], format="csr")

    @lru_cache(maxsize=None)
    def mass_1d(self, d: int, kind: str) -> sp.csr_matrix:
        e = self._quad_collocation(d, kind, 0)
        w = self.directions[d].quad_weights
        return (e.T @ sp.diags(w) @ e).tocsr()

    def mass_block(self, tag: SpaceTag, block: int,
                   weight: Optional[np.ndarray] = None) -> sp.csr_matrix:
        """Gram matrix of one block, optionally weighted by nodal values."""
        if weight is None:
            kinds = self.kinds(tag, block)
            m = [self.mass_1d(d, kinds[d]) for d in range(3)]
            return sp.kron(sp.kron(m[0], m[1]), m[2], format="csr")
        b = self.basis_matrix(tag, block)
        w = (self.quad_weights * weight).ravel()
        return (b @ sp.diags(w) @ b.T).tocsr()

    def stiffness_block(self, weight: np.ndarray) -> sp.csr_matrix:
        """int w grad(phi_i) . grad(phi_j) on V0."""
        w = sp.diags((self.quad_weights * weight).ravel())
        total = None
        for axis in range(3):
            if self.directions[axis].trivial:
                continue
            b = self.basis_matrix(SpaceTag.V0, 0, axis)
            term = b @ w @ b.T
            total = term if total is None else total + term
        if total is None:
            n = self.dimension(SpaceTag.V0)
            return sp.csr_matrix((n, n))
        return total.tocsr()

    # --------------------------------------------------------------- boundary

    @lru_cache(maxsize=None)
    def essential_mask(self, tag: SpaceTag) -> np.ndarray:
        """
        Boolean mask of DOFs fixed by clamped boundaries.

        Velocity (X, V0) DOFs touching a clamped boundary are fixed; for V1
        the tangential DOFs (factor S_{p+1} along the clamped axis) are.
        """
        masks = []
        for block, shape in enumerate(self._shapes[tag]):
            mask = np.zeros(shape, dtype=bool)
            if tag in (SpaceTag.V0, SpaceTag.X, SpaceTag.V1):
                kinds = self.kinds(tag, block)
                for d, direction in enumerate(self.directions):
                    if direction.boundary is Boundary.CLAMPED and kinds[d] == HIGH:
                        index = [slice(None)] * 3
                        index[d] = [0, shape[d] - 1]
                        mask[tuple(index)] = True
            masks.append(mask.ravel())
        return np.concatenate(masks)

    def free_dofs(self, tag: SpaceTag) -> np.ndarray:
        return np.flatnonzero(~self.essential_mask(tag))

    @property
    def has_clamped(self) -> bool:
        return any(d.boundary is Boundary.CLAMPED for d in self.directions)

    def describe(self) -> dict:
        """Geometry metadata (used by snapshots and manifests)."""
        return {
            "dim": self.dim,
            "degrees": [d.low.degree for d in self.directions],
            "cells": [d.high.n_cells for d in self.directions],
            "boundaries": [d.boundary.value for d in self.directions],
            "domains": [list(d.high.domain) for d in self.directions],
            "trivial": [d.trivial for d in self.directions],
        }


def build_complex(degrees: Sequence[int], cells: Sequence[int],
                  boundaries: Sequence, domains: Optional[Sequence[Tuple[float, float]]] = None,
                  n_gauss: Optional[Sequence[Optional[int]]] = None) -> DeRhamComplex:
    """
    Build the complex for a 1D, 2D or 3D box.

    The logical dimension is the length of `degrees`; missing directions are
    trivialized.
    """
    dim = len(degrees)
    if not 1 <= dim <= 3:
        raise ConfigurationError(f"logical dimension must be 1, 2 or 3, got {dim}")
    if not len(cells) == len(boundaries) == dim:
        raise ConfigurationError("degrees, cells and boundaries must have the same length")
    domains = list(domains) if domains is not None else [(0.0, 1.0)] * dim
    if len(domains) != dim:
        raise ConfigurationError("one interval per direction is required")
    n_gauss = list(n_gauss) if n_gauss is not None else [None] * dim

    directions = []
    for d in range(dim):
        try:
            boundary = Boundary(boundaries[d])
        except ValueError as exc:
            raise ConfigurationError(f"unknown boundary mode {boundaries[d]!r}") from exc
        directions.append(build_direction(int(degrees[d]), int(cells[d]), boundary,
                                          tuple(domains[d]), n_gauss[d]))
    while len(directions) < 3:
        directions.append(trivial_direction())
    complex_ = DeRhamComplex(directions, dim)
    logger.info("de Rham complex ready", extra={"geometry": complex_.describe()})
    return complex_
