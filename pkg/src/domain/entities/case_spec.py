"""
CaseSpec entity: geometry, physics and time stepping of one experiment.
"""
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, Tuple

from src.domain.exceptions import ConfigurationError
from src.domain.value_objects.dissipation import DissipationSpec
from src.domain.value_objects.spline_space import Boundary


class CaseName(Enum):
    """Experiments with initial conditions and reference data."""
    CURRENT_SHEET_1D = "CurrentSheet1D"
    DISPERSION_1D = "Dispersion1D"
    ORSZAG_TANG_IDEAL = "OrszagTangIdeal"
    ORSZAG_TANG_VR = "OrszagTangVR"
    KELVIN_HELMHOLTZ = "KelvinHelmholtz"
    CURRENT_SHEET_2D = "CurrentSheet2D"


# logical dimension and which directions must be periodic
CASE_GEOMETRY: Dict[CaseName, Tuple[int, Tuple[bool, ...]]] = {
    CaseName.CURRENT_SHEET_1D: (1, (False,)),
    CaseName.DISPERSION_1D: (1, (True,)),
    CaseName.ORSZAG_TANG_IDEAL: (2, (True, True)),
    CaseName.ORSZAG_TANG_VR: (2, (True, True)),
    CaseName.KELVIN_HELMHOLTZ: (2, (True, True)),
    CaseName.CURRENT_SHEET_2D: (2, (True, False)),
}


@dataclass(frozen=True)
class CaseSpec:
    """A fully specified run of one case."""

    name: CaseName
    cells: Tuple[int, ...]
    degrees: Tuple[int, ...]
    boundaries: Tuple[Boundary, ...]
    domains: Tuple[Tuple[float, float], ...]
    gamma: float
    dt: float
    t_end: float
    mu: DissipationSpec = field(default_factory=DissipationSpec.off)
    eta: DissipationSpec = field(default_factory=DissipationSpec.off)
    parameters: Dict[str, Any] = field(default_factory=dict)
    provenance: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        dim, periodic = CASE_GEOMETRY[self.name]
        sizes = {len(self.cells), len(self.degrees), len(self.boundaries), len(self.domains)}
        if sizes != {dim}:
            raise ConfigurationError(f"{self.name.value} is a {dim}D case; geometry lists must have length {dim}")
        for d, must_be_periodic in enumerate(periodic):
            if must_be_periodic and self.boundaries[d] is not Boundary.PERIODIC:
                raise ConfigurationError(f"{self.name.value} needs a periodic direction {d}")
        if not self.dt > 0.0 or not self.t_end >= 0.0:
            raise ConfigurationError("dt must be positive and t_end nonnegative")

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    @property
    def magnetic(self) -> bool:
        """Magnetic propagators are skipped for purely fluid cases."""
        return self.name is not CaseName.KELVIN_HELMHOLTZ

    @property
    def linearized(self) -> bool:
        return bool(self.parameters.get("linearized", False))

    def with_changes(self, **changes) -> "CaseSpec":
        return replace(self, **changes)

    def parameter(self, key: str, default: Any = None) -> Any:
        return self.parameters.get(key, default)
