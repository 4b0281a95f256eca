"""
RunConfig entity: a case plus solver settings and output cadence.
"""
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

from src.domain.entities.case_spec import CaseSpec
from src.domain.exceptions import ConfigurationError


@dataclass(frozen=True)
class RunConfig:
    """Everything one `run` invocation needs."""

    case: CaseSpec
    output_dir: Path
    snapshot_every: int = 100
    diagnostics_every: int = 1
    trace_every: int = 1
    linear_tol: float = 1e-12
    picard_tol: float = 1e-10
    picard_max_iters: int = 50
    max_linear_iterations: int = 2000
    invariant_tol: float = 1e-9
    growth_window: Optional[tuple] = None

    def __post_init__(self):
        for name in ("snapshot_every", "diagnostics_every", "trace_every"):
            if getattr(self, name) < 1:
                raise ConfigurationError(f"{name} must be a positive number of steps")
        if not (self.linear_tol > 0.0 and self.picard_tol > 0.0 and self.invariant_tol > 0.0):
            raise ConfigurationError("solver tolerances must be positive")
        if self.picard_max_iters < 1 or self.max_linear_iterations < 1:
            raise ConfigurationError("iteration limits must be positive")

    def with_changes(self, **changes) -> "RunConfig":
        return replace(self, **changes)

    def to_config(self) -> dict:
        """Plain mapping in the run-file layout (YAML/JSON friendly)."""
        case = self.case
        return {
            "case": case.name.value,
            "geometry": {
                "cells": list(case.cells),
                "degrees": list(case.degrees),
                "boundaries": [b.value for b in case.boundaries],
                "domains": [list(d) for d in case.domains],
            },
            "physics": {
                "gamma": case.gamma,
                "mu": case.mu.to_config(),
                "eta": case.eta.to_config(),
            },
            "time": {"dt": case.dt, "t_end": case.t_end},
            "parameters": dict(case.parameters),
            "solver": {
                "linear_tol": self.linear_tol,
                "nonlinear_tol": self.picard_tol,
                "max_nonlinear_iterations": self.picard_max_iters,
                "max_linear_iterations": self.max_linear_iterations,
                "invariant_tol": self.invariant_tol,
            },
            "output": {
                "dir": str(self.output_dir),
                "snapshot_every": self.snapshot_every,
                "diagnostics_every": self.diagnostics_every,
                "trace_every": self.trace_every,
            },
            "analysis": {"growth_window": list(self.growth_window) if self.growth_window else None},
            "provenance": dict(case.provenance),
        }
