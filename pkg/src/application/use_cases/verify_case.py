"""
Verify Case use case: run a preset and check its acceptance properties.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from src.application.use_cases.compute_spectrum import dispersion_errors, dispersion_spectra
from src.application.use_cases.run_simulation import (
    ERF_FILE,
    RunSimulationRequest,
    RunSimulationUseCase,
)
from src.domain.entities.case_spec import CaseName
from src.domain.entities.diagnostics_record import CSV_COLUMNS
from src.domain.entities.run_config import RunConfig
from src.domain.services.diagnostics import growth_rate, shock_width
from src.infrastructure.persistence.run_store import RunStore
from src.workers.output_workers import ModeEnergyWorker

logger = logging.getLogger(__name__)

MASS_TOL = 1e-12
DIVB_TOL = 1e-12
ENERGY_TOL = 1e-7
ENTROPY_TOL = 1e-12
ERF_TOL = 1e-3
DISPERSION_TOL = 0.05
SHOCK_CELLS = 4.0
GROWTH_R2 = 0.98
GROWTH_MODES = range(1, 7)


@dataclass(frozen=True)
class Check:
    """One acceptance check."""

    name: str
    value: float
    threshold: float
    passed: bool

    def row(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status:4}  {self.name:28} {self.value:12.4e}  (limit {self.threshold:.1e})"


class VerifyCaseRequest:
    """Request object for a verification run."""

    def __init__(self, config: RunConfig):
        self.config = config


class VerifyCaseResponse:
    """Response object for a verification run."""

    def __init__(self, case: str, checks: List[Check]):
        self.case = case
        self.checks = checks

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def table(self) -> str:
        return "\n".join(check.row() for check in self.checks)


class VerifyCaseUseCase:
    """Use case for running one case and checking its invariants and references."""

    def __init__(self, run_use_case: Optional[RunSimulationUseCase] = None):
        self.run_use_case = run_use_case or RunSimulationUseCase()

    def execute(self, request: VerifyCaseRequest) -> VerifyCaseResponse:
        config = request.config
        case = config.case
        result = self.run_use_case.execute(RunSimulationRequest(config))
        store = RunStore(result.output_dir)
        table = store.read_diagnostics()
        checks = invariant_checks(table, case)

        if case.name is CaseName.CURRENT_SHEET_1D:
            checks.append(self._erf_check(store, case, result.final_state))
        elif case.name is CaseName.DISPERSION_1D:
            checks.extend(self._dispersion_checks(store, case))
        elif case.name is CaseName.ORSZAG_TANG_IDEAL:
            checks.append(self._shock_check(result.context.diagnostics, result.final_state))
        elif case.name is CaseName.CURRENT_SHEET_2D:
            checks.extend(self._growth_checks(store, config))

        response = VerifyCaseResponse(case.name.value, checks)
        logger.info("verification finished", extra={"case": case.name.value, "passed": response.passed})
        return response

    @staticmethod
    def _erf_check(store: RunStore, case, state) -> Check:
        _, rows = store.read_rows(ERF_FILE)
        x, error = rows[:, 0], rows[:, 3]
        eta = case.eta.value(0.0)
        width = 4.0 * math.sqrt(eta * (state.time + case.parameter("t0", 10.0)))
        zone = np.abs(x) <= width
        value = float(np.max(np.abs(error[zone])) / case.parameter("by0", 1e-3))
        return Check("erf relative Linf", value, ERF_TOL, value <= ERF_TOL)

    @staticmethod
    def _dispersion_checks(store: RunStore, case) -> List[Check]:
        errors = dispersion_errors(dispersion_spectra(store), case.parameter("rho0", 1.0),
                                   case.parameter("p0", 1.0), case.parameter("b0", (1.0, 1.0, 0.0)),
                                   case.gamma)
        checks = []
        for name, values in errors.items():
            value = float(np.nanmax(values)) if np.all(np.isfinite(values)) else float("inf")
            checks.append(Check(f"{name} branch rel. error", value, DISPERSION_TOL,
                                value <= DISPERSION_TOL))
        return checks

    @staticmethod
    def _shock_check(diagnostics, state) -> Check:
        """Width of the steepest x-jump of rho over all sampled y rows."""
        x, y = diagnostics.sample_points(4)[:2]
        rho = diagnostics.evaluate(state.rho, [x, y, diagnostics._transverse(2, None)])[0][:, :, 0]
        row = int(np.argmax(np.max(np.abs(np.diff(rho, axis=0)), axis=0)))
        cell = diagnostics.complex.directions[0].cell_size
        value = shock_width(rho[:, row], x[1] - x[0], cell)
        return Check("shock width [cells]", value, SHOCK_CELLS, value <= SHOCK_CELLS)

    @staticmethod
    def _growth_checks(store: RunStore, config: RunConfig) -> List[Check]:
        modes, times, energies = store.read_trace(ModeEnergyWorker.FILE)
        window = config.growth_window or (times[0], times[-1])
        checks = []
        for j, mode in enumerate(modes):
            if int(mode) not in GROWTH_MODES:
                continue
            rate, r2 = growth_rate(times, energies[:, j], tuple(window))
            checks.append(Check(f"mode {int(mode)} fit R2", r2, GROWTH_R2, r2 >= GROWTH_R2 and rate > 0.0))
        return checks


def invariant_checks(table: np.ndarray, case) -> List[Check]:
    """Mass, div B, energy and entropy checks over a diagnostics table."""
    col = {name: i for i, name in enumerate(CSV_COLUMNS)}
    mass = table[:, col["mass"]]
    energy = table[:, col["e_total"]]
    entropy = table[:, col["entropy"]]
    checks = []

    drift = float(np.max(np.abs(mass - mass[0])) / abs(mass[0]))
    checks.append(Check("mass drift", drift, MASS_TOL, drift <= MASS_TOL))
    div_b = float(np.max(table[:, col["divB_l2"]]))
    checks.append(Check("divB l2", div_b, DIVB_TOL, div_b <= DIVB_TOL))
    if not case.linearized:
        drift = float(np.max(np.abs(energy - energy[0])) / abs(energy[0]))
        checks.append(Check("energy drift", drift, ENERGY_TOL, drift <= ENERGY_TOL))
    scale = max(abs(entropy[0]), 1.0)
    if not case.mu.active and not case.eta.active:
        drift = float(np.max(np.abs(entropy - entropy[0])) / scale)
        checks.append(Check("entropy drift", drift, ENTROPY_TOL, drift <= ENTROPY_TOL))
    else:
        decrease = float(max(np.max(-np.diff(entropy), initial=0.0), 0.0) / scale)
        checks.append(Check("entropy decrease", decrease, ENTROPY_TOL, decrease <= ENTROPY_TOL))
    return checks
