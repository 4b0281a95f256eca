"""
Simulation state and time-step configuration entities.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

from src.domain.exceptions import ConfigurationError
from src.domain.value_objects.dissipation import DissipationSpec
from src.domain.value_objects.field import Field, SpaceTag


@dataclass(frozen=True)
class State:
    """Discrete fields (u, rho, s, B) at one instant."""

    u: Field
    rho: Field
    s: Field
    B: Field
    time: float = 0.0
    step: int = 0

    def __post_init__(self):
        self.u.require(SpaceTag.X)
        self.rho.require(SpaceTag.V3)
        self.s.require(SpaceTag.V3)
        self.B.require(SpaceTag.V2)
        if len(self.rho) != len(self.s):
            raise ConfigurationError("rho and s must live in the same V3 space")

    def evolve(self, **changes) -> "State":
        """Copy with some fields replaced."""
        return replace(self, **changes)

    def advanced(self, dt: float) -> "State":
        return replace(self, time=self.time + dt, step=self.step + 1)


@dataclass(frozen=True)
class StepConfig:
    """Time step, nonlinear solver settings and dissipation of a run."""

    dt: float
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    mu: DissipationSpec = field(default_factory=DissipationSpec.off)
    eta: DissipationSpec = field(default_factory=DissipationSpec.off)
    linearized_B0: Optional[Field] = None
    magnetic: bool = True

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ConfigurationError(f"time step must be positive, got {self.dt}")
        if not self.picard_tol > 0.0:
            raise ConfigurationError("picard_tol must be positive")
        if self.picard_max_iters < 1:
            raise ConfigurationError("picard_max_iters must be >= 1")
        if self.linearized_B0 is not None:
            self.linearized_B0.require(SpaceTag.V2)

    def with_dt(self, dt: float) -> "StepConfig":
        return replace(self, dt=dt)
