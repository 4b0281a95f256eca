"""
Univariate spline space value objects.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np


class Boundary(Enum):
    """Boundary mode of a univariate spline space."""
    PERIODIC = "periodic"
    CLAMPED = "clamped"


@dataclass(frozen=True, eq=False)
class SplineSpace1D:
    """
    Uniform B-spline space of maximum regularity on an interval.

    Periodic spaces use a knot vector extended by periodicity so that the
    first `degree` basis functions coincide with the last ones; clamped
    spaces repeat the end knots degree+1 times.
    """

    degree: int
    n_cells: int
    boundary: Boundary
    domain: Tuple[float, float]
    knots: np.ndarray = field(repr=False)
    greville: np.ndarray = field(repr=False)

    @property
    def periodic(self) -> bool:
        return self.boundary is Boundary.PERIODIC

    @property
    def dimension(self) -> int:
        if self.periodic:
            return self.n_cells
        return self.n_cells + self.degree

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def cell_size(self) -> float:
        return self.length / self.n_cells

    @property
    def breaks(self) -> np.ndarray:
        return np.linspace(self.domain[0], self.domain[1], self.n_cells + 1)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Map points of a periodic space into [a, b)."""
        a, _ = self.domain
        return a + np.mod(np.asarray(x, dtype=float) - a, self.length)


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Gauss–Legendre nodes and weights mapped to every cell of a space."""

    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must have the same shape")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be positive")

    @property
    def n_cells(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_gauss(self) -> int:
        return self.nodes.shape[1]

    @property
    def points(self) -> np.ndarray:
        """Flattened node positions, cell-major."""
        return self.nodes.ravel()

    @property
    def flat_weights(self) -> np.ndarray:
        return self.weights.ravel()
