"""
Viscosity and resistivity weight fields, including the artificial
(gradient-scaled) shock-capturing variants.
"""
import logging
from typing import Optional

import numpy as np

from src.domain.services.galerkin import Galerkin
from src.domain.value_objects.dissipation import DissipationMode, DissipationSpec
from src.domain.value_objects.field import Field, SpaceTag
from src.domain.value_objects.weight import WeightFunction

logger = logging.getLogger(__name__)


class Stabilization:
    """Builds mu and eta at the quadrature nodes from a DissipationSpec."""

    def __init__(self, galerkin: Galerkin):
        self.galerkin = galerkin
        self.complex = galerkin.complex

    @property
    def h(self) -> float:
        return self.complex.min_cell_size

    def velocity_gradient_norm(self, u: Field) -> np.ndarray:
        """Frobenius norm of grad(u) at every quadrature node."""
        coeffs = u.require(SpaceTag.X).coeffs
        total = np.zeros(self.complex.quad_shape)
        for axis, direction in enumerate(self.complex.directions):
            if direction.trivial:
                continue
            for component in self.complex.evaluate(SpaceTag.X, coeffs, deriv_axis=axis):
                total += component ** 2
        return np.sqrt(total)

    def current_norm(self, b: Field) -> np.ndarray:
        """|curl~(B)| at every quadrature node."""
        j = self.galerkin.dual_curl(b)
        blocks = self.complex.evaluate(SpaceTag.V1, j.coeffs)
        return np.sqrt(sum(block ** 2 for block in blocks))

    def artificial_mu(self, u: Field, mu_a: float) -> WeightFunction:
        """mu = mu_a |grad u|."""
        return WeightFunction(mu_a * self.velocity_gradient_norm(u), "mu")

    def artificial_eta(self, b: Field, eta_a: float) -> WeightFunction:
        """eta = eta_a |curl~ B|."""
        return WeightFunction(eta_a * self.current_norm(b), "eta")

    def mu(self, spec: DissipationSpec, u: Field) -> Optional[WeightFunction]:
        """Viscosity weight for the current state, or None when off."""
        if not spec.active:
            return None
        value = spec.value(self.h)
        if spec.mode is DissipationMode.ARTIFICIAL:
            return self.artificial_mu(u, value)
        return WeightFunction.constant(self.complex.quad_shape, value, "mu")

    def eta(self, spec: DissipationSpec, b: Field) -> Optional[WeightFunction]:
        """Resistivity weight for the current state, or None when off."""
        if not spec.active:
            return None
        value = spec.value(self.h)
        if spec.mode is DissipationMode.ARTIFICIAL:
            return self.artificial_eta(b, value)
        return WeightFunction.constant(self.complex.quad_shape, value, "eta")
