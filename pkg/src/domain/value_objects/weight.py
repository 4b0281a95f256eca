"""
WeightFunction value object: a scalar sampled at every quadrature node.
"""
from dataclasses import dataclass

import numpy as np

from src.domain.exceptions import ThermodynamicStateError


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Weight of a weighted mass operator, stored at the 3D quadrature nodes."""

    values: np.ndarray
    name: str = "weight"

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 3:
            raise ValueError("weight values must live on the 3D quadrature grid")
        if not np.all(np.isfinite(values)):
            raise ThermodynamicStateError(f"{self.name} has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, shape, value: float, name: str = "weight") -> "WeightFunction":
        return cls(np.full(shape, float(value)), name)

    def require_positive(self) -> "WeightFunction":
        """Raise ThermodynamicStateError unless every value is > 0."""
        if np.any(self.values <= 0.0):
            raise ThermodynamicStateError(
                f"{self.name} must be strictly positive (min {self.values.min():.3e})"
            )
        return self

    def require_nonnegative(self) -> "WeightFunction":
        if np.any(self.values < 0.0):
            raise ThermodynamicStateError(f"{self.name} must be nonnegative")
        return self

    @property
    def is_zero(self) -> bool:
        return not np.any(self.values)
