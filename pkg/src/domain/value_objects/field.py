"""
Field value object: a coefficient vector tagged with its discrete space.
"""
from dataclasses import dataclass
from enum import Enum

import numpy as np

from src.domain.exceptions import SpaceMismatchError


class SpaceTag(Enum):
    """Spaces of the discrete de Rham complex plus the velocity space X = (V0)^3."""
    V0 = "V0"
    V1 = "V1"
    V2 = "V2"
    V3 = "V3"
    X = "X"


@dataclass(frozen=True, eq=False)
class Field:
    """Spline field: coefficients in the basis of `space_tag`."""

    space_tag: SpaceTag
    coeffs: np.ndarray

    def __post_init__(self):
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.ndim != 1:
            raise ValueError("field coefficients must be a flat vector")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def require(self, tag: SpaceTag) -> "Field":
        """Return self if tagged `tag`, else raise SpaceMismatchError."""
        if self.space_tag is not tag:
            raise SpaceMismatchError(f"expected a {tag.value} field, got {self.space_tag.value}")
        return self

    def with_coeffs(self, coeffs: np.ndarray) -> "Field":
        return Field(self.space_tag, coeffs)

    def __add__(self, other: "Field") -> "Field":
        other.require(self.space_tag)
        return Field(self.space_tag, self.coeffs + other.coeffs)

    def __sub__(self, other: "Field") -> "Field":
        other.require(self.space_tag)
        return Field(self.space_tag, self.coeffs - other.coeffs)

    def scaled(self, factor: float) -> "Field":
        return Field(self.space_tag, factor * self.coeffs)

    def __len__(self):
        return self.coeffs.size
