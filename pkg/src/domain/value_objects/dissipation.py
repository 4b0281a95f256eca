"""
Dissipation coefficient setting (viscosity mu or resistivity eta).
"""
import re
from dataclasses import dataclass
from enum import Enum
from typing import Any, Union

from src.domain.exceptions import ConfigurationError

_MESH_SCALED = re.compile(r"^\s*([0-9.eE+-]*)\s*h2\s*$")


class DissipationMode(Enum):
    OFF = "off"
    CONSTANT = "constant"
    ARTIFICIAL = "artificial"


@dataclass(frozen=True)
class DissipationSpec:
    """
    Off, a constant coefficient, or an artificial coefficient scaling a
    gradient magnitude. With `mesh_scaled` the coefficient multiplies h^2,
    h being the smallest cell edge ("2h2" means 2 h^2).
    """

    mode: DissipationMode = DissipationMode.OFF
    coefficient: float = 0.0
    mesh_scaled: bool = False

    def __post_init__(self):
        if self.coefficient < 0.0:
            raise ConfigurationError(f"dissipation coefficient must be >= 0, got {self.coefficient}")

    @classmethod
    def off(cls) -> "DissipationSpec":
        return cls()

    @classmethod
    def constant(cls, value: float) -> "DissipationSpec":
        return cls(DissipationMode.CONSTANT, float(value))

    @classmethod
    def artificial(cls, coefficient: Union[float, str]) -> "DissipationSpec":
        if isinstance(coefficient, str):
            match = _MESH_SCALED.match(coefficient)
            if not match:
                raise ConfigurationError(f"cannot parse artificial coefficient {coefficient!r}")
            factor = float(match.group(1)) if match.group(1) else 1.0
            return cls(DissipationMode.ARTIFICIAL, factor, mesh_scaled=True)
        return cls(DissipationMode.ARTIFICIAL, float(coefficient))

    @classmethod
    def parse(cls, raw: Any) -> "DissipationSpec":
        """Build from a config value: "off", a number, or {"artificial": coeff}."""
        if raw is None or (isinstance(raw, str) and raw.strip().lower() == "off"):
            return cls.off()
        if isinstance(raw, bool):
            raise ConfigurationError("dissipation must be 'off', a number or {artificial: coeff}")
        if isinstance(raw, (int, float)):
            if raw < 0:
                raise ConfigurationError(f"dissipation coefficient must be >= 0, got {raw}")
            return cls.constant(raw) if raw > 0 else cls.off()
        if isinstance(raw, dict) and set(raw) == {"artificial"}:
            return cls.artificial(raw["artificial"])
        raise ConfigurationError(f"invalid dissipation value {raw!r}")

    @property
    def active(self) -> bool:
        return self.mode is not DissipationMode.OFF and self.coefficient > 0.0

    def value(self, h: float) -> float:
        """Resolved coefficient for the smallest cell edge h."""
        return self.coefficient * h * h if self.mesh_scaled else self.coefficient

    def to_config(self) -> Any:
        if self.mode is DissipationMode.OFF:
            return "off"
        if self.mode is DissipationMode.CONSTANT:
            return self.coefficient
        if self.mesh_scaled:
            return {"artificial": f"{self.coefficient:g}h2"}
        return {"artificial": self.coefficient}
