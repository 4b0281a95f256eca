"""
Diagnostics record entity: conserved quantities of one state.
"""
from dataclasses import asdict, dataclass, field
from typing import Dict, Tuple

CSV_COLUMNS = ("step", "time", "mass", "entropy", "e_kin", "e_int", "e_mag", "e_total", "divB_l2")


@dataclass(frozen=True)
class DiagnosticsRecord:
    """Integrals of a state; e_total is the sum of the three energies."""

    time: float
    mass: float
    entropy: float
    e_kin: float
    e_int: float
    e_mag: float
    divB_l2: float
    step: int = 0
    momentum: Tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))

    @property
    def e_total(self) -> float:
        return self.e_kin + self.e_int + self.e_mag

    def row(self) -> Dict[str, float]:
        """Values in diagnostics.csv column order."""
        values = asdict(self)
        values["e_total"] = self.e_total
        return {name: values[name] for name in CSV_COLUMNS}
