"""
Galerkin operators on the spline complex: mass and weighted mass matrices,
the L2 projector onto V3, the weak dual curl and the linear solvers used by
the time integrators.
"""
import logging
from typing import Callable, Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from src.domain.exceptions import SolverError
from src.domain.services.derham import DeRhamComplex
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.weight import WeightFunction

logger = logging.getLogger(__name__)

DEFAULT_LINEAR_TOL = 1e-12
DEFAULT_MAX_LINEAR_ITERATIONS = 2000
_REFINEMENT_STEPS = 3


def _relative_residual(matrix, x, rhs) -> float:
    norm = np.linalg.norm(rhs)
    residual = np.linalg.norm(matrix @ x - rhs)
    return residual / norm if norm > 0.0 else residual


class LinearOperator:
    """
    Sparse matrix plus a lazily built sparse LU factorization.

    Every solve is followed by a residual check; a few steps of iterative
    refinement are taken before giving up with SolverError.
    """

    def __init__(self, matrix, name: str = "operator", tol: float = DEFAULT_LINEAR_TOL):
        self.matrix = sp.csr_matrix(matrix)
        self.name = name
        self.tol = tol
        self._lu = None

    @property
    def shape(self):
        return self.matrix.shape

    def __matmul__(self, x):
        return self.matrix @ x

    def _factor(self):
        if self._lu is None:
            try:
                self._lu = spla.splu(self.matrix.tocsc())
            except RuntimeError as exc:
                raise SolverError(f"{self.name}: factorization failed ({exc})") from exc
        return self._lu

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        rhs = np.asarray(rhs, dtype=float)
        if self.matrix.shape[0] == 0:
            return np.zeros(0)
        lu = self._factor()
        x = lu.solve(rhs)
        residual = _relative_residual(self.matrix, x, rhs)
        steps = 0
        while residual > self.tol and steps < _REFINEMENT_STEPS:
            x = x + lu.solve(rhs - self.matrix @ x)
            residual = _relative_residual(self.matrix, x, rhs)
            steps += 1
        if not np.isfinite(residual) or residual > self.tol:
            raise SolverError(f"{self.name}: direct solve did not reach tolerance",
                              iterations=steps, residual=float(residual))
        return x

    def restricted(self, free: np.ndarray) -> "LinearOperator":
        """Operator on the sub-space of the given DOF indices."""
        return LinearOperator(self.matrix[free][:, free], self.name, self.tol)

    def preconditioner(self) -> spla.LinearOperator:
        lu = self._factor()
        return spla.LinearOperator(self.shape, matvec=lu.solve, dtype=float)

    def is_symmetric(self, tol: float = 1e-13) -> bool:
        diff = abs(self.matrix - self.matrix.T)
        scale = max(abs(self.matrix).max(), 1.0)
        return diff.nnz == 0 or diff.max() <= tol * scale


class Galerkin:
    """Mass-type operators and solves for one complex."""

    def __init__(self, complex_: DeRhamComplex, linear_tol: float = DEFAULT_LINEAR_TOL,
                 max_iterations: int = DEFAULT_MAX_LINEAR_ITERATIONS):
        self.complex = complex_
        self.linear_tol = linear_tol
        self.max_iterations = max_iterations
        self._mass = {}
        self._free_mass = {}
        self._basis_integrals = None

    # ------------------------------------------------------------- assembly

    def mass_matrix(self, tag: SpaceTag) -> LinearOperator:
        """Gram matrix of the tagged space (cached)."""
        if tag not in self._mass:
            blocks = [self.complex.mass_block(tag, b) for b in range(self.complex.n_blocks(tag))]
            self._mass[tag] = LinearOperator(sp.block_diag(blocks, format="csr"),
                                             f"M_{tag.value}", self.linear_tol)
        return self._mass[tag]

    def free_mass(self, tag: SpaceTag) -> LinearOperator:
        """Mass matrix restricted to the DOFs not fixed by clamped boundaries."""
        if tag not in self._free_mass:
            self._free_mass[tag] = self.mass_matrix(tag).restricted(self.complex.free_dofs(tag))
        return self._free_mass[tag]

    def weighted_mass(self, tag: SpaceTag, weight: WeightFunction,
                      invertible: bool = False) -> LinearOperator:
        """
        Gram matrix of  int w a.b  on X, V1 or V3 (any tag is accepted).

        An operator that will be inverted on V3 (M[T]_3) requires w > 0.
        """
        if invertible and tag is SpaceTag.V3:
            weight.require_positive()
        if tag is SpaceTag.X:
            block = self.complex.mass_block(SpaceTag.V0, 0, weight.values)
            matrix = sp.block_diag([block] * 3, format="csr")
        else:
            matrix = sp.block_diag(
                [self.complex.mass_block(tag, b, weight.values)
                 for b in range(self.complex.n_blocks(tag))],
                format="csr",
            )
        return LinearOperator(matrix, f"M[{weight.name}]_{tag.value}", self.linear_tol)

    def vector_stiffness(self, weight: WeightFunction) -> sp.csr_matrix:
        """int w grad(u):grad(v) on X (component-wise scalar stiffness)."""
        block = self.complex.stiffness_block(weight.values)
        return sp.block_diag([block] * 3, format="csr")

    def weight(self, values: np.ndarray, name: str = "weight") -> WeightFunction:
        return WeightFunction(np.reshape(values, self.complex.quad_shape), name)

    # ------------------------------------------------------------ projections

    def load_3(self, values: np.ndarray) -> np.ndarray:
        """Load vector  int g q_i  of nodal data g on V3."""
        return self.complex.load_vector(SpaceTag.V3, [np.reshape(values, self.complex.quad_shape)])

    def integral_3(self, coeffs: np.ndarray) -> float:
        """Integral over the box of a V3 field (basis integrals dotted with coeffs)."""
        if self._basis_integrals is None:
            self._basis_integrals = self.load_3(np.ones(self.complex.quad_shape))
        return float(self._basis_integrals @ coeffs)

    def l2_project_3(self, values: np.ndarray) -> Field:
        """P3: solve M3 c = int g q_i."""
        return Field(SpaceTag.V3, self.solve(self.mass_matrix(SpaceTag.V3), self.load_3(values)))

    def dual_curl(self, b: Field) -> Field:
        """Weak curl V2 -> V1:  int curl~(B).A = int B.curl(A) for every admissible A."""
        return Field(SpaceTag.V1, self.dual_curl_coeffs(b.require(SpaceTag.V2).coeffs))

    def dual_curl_coeffs(self, b: np.ndarray) -> np.ndarray:
        rhs = self.complex.C.T @ (self.mass_matrix(SpaceTag.V2) @ b)
        return self.solve_free(SpaceTag.V1, rhs)

    def solve_free(self, tag: SpaceTag, rhs: np.ndarray) -> np.ndarray:
        """Mass solve on the free DOFs; constrained entries are returned as 0."""
        free = self.complex.free_dofs(tag)
        out = np.zeros(self.complex.dimension(tag))
        out[free] = self.solve(self.free_mass(tag), rhs[free])
        return out

    # ---------------------------------------------------------------- solvers

    def solve(self, op: LinearOperator, rhs: np.ndarray) -> np.ndarray:
        return op.solve(rhs)

    def cg(self, apply: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray,
           preconditioner: Optional[LinearOperator] = None, x0: Optional[np.ndarray] = None,
           name: str = "cg") -> np.ndarray:
        """Preconditioned conjugate gradient on a symmetric positive definite operator."""
        return self._krylov(spla.cg, apply, rhs, preconditioner, x0, name)

    def gmres(self, apply: Callable[[np.ndarray], np.ndarray], rhs: np.ndarray,
              preconditioner: Optional[LinearOperator] = None, x0: Optional[np.ndarray] = None,
              name: str = "gmres") -> np.ndarray:
        return self._krylov(spla.gmres, apply, rhs, preconditioner, x0, name)

    def _krylov(self, method, apply, rhs, preconditioner, x0, name):
        n = len(rhs)
        if n == 0:
            return np.zeros(0)
        if not np.any(rhs):
            return np.zeros(n)
        operator = spla.LinearOperator((n, n), matvec=apply, dtype=float)
        precond = preconditioner.preconditioner() if preconditioner is not None else None
        iterations = [0]

        def count(_):
            iterations[0] += 1

        kwargs = dict(x0=x0, rtol=self.linear_tol, atol=0.0, maxiter=self.max_iterations,
                      M=precond, callback=count)
        if method is spla.gmres:
            kwargs["callback_type"] = "pr_norm"
            kwargs["restart"] = 60
        x, info = method(operator, rhs, **kwargs)
        residual = _relative_residual(operator, x, rhs)
        logger.debug("krylov solve", extra={"solver": name, "iterations": iterations[0],
                                             "residual": residual})
        if info != 0 or not np.isfinite(residual):
            # the recursive residual may stall just above tolerance
            if np.isfinite(residual) and residual <= 100.0 * self.linear_tol:
                logger.warning("krylov solve accepted near tolerance",
                               extra={"solver": name, "residual": residual})
                return x
            raise SolverError(f"{name}: no convergence", iterations=iterations[0],
                              residual=float(residual))
        return x
