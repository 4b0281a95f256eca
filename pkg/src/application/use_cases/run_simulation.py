"""
Run Simulation use case.
"""
import logging
import subprocess
import time
import uuid
from importlib.metadata import PackageNotFoundError, version
from pathlib import Path
from typing import Optional

from src.application.use_cases.simulation_context import SimulationContext
from src.domain.entities.case_spec import CaseName
from src.domain.entities.run_config import RunConfig
from src.domain.entities.state import State
from src.domain.events.run_events import RunFinishedEvent, StepCompletedEvent
from src.domain.exceptions import VrmhdError
from src.domain.services.cases import init_case, step_config_for, to_plain
from src.infrastructure.messaging.event_bus import EventBus
from src.infrastructure.persistence.run_store import RunStore
from src.infrastructure.persistence.snapshot_store import SnapshotStore
from src.workers.output_workers import (
    DiagnosticsWorker,
    ModeEnergyWorker,
    SnapshotWorker,
    TraceWorker,
    subscribe_all,
)

logger = logging.getLogger(__name__)

ERF_FILE = "erf_comparison.csv"
STREAMLINES_FILE = "streamlines.png"


class RunSimulationRequest:
    """Request object for a simulation run."""

    def __init__(self, config: RunConfig, restart: Optional[str] = None):
        self.config = config
        self.restart = restart


class RunSimulationResponse:
    """Response object for a simulation run."""

    def __init__(self, run_id: str, status: str, steps: int, output_dir: Path,
                 final_state: State, message: str, context: Optional[SimulationContext] = None):
        self.run_id = run_id
        self.status = status
        self.steps = steps
        self.output_dir = output_dir
        self.final_state = final_state
        self.message = message
        self.context = context


class RunSimulationUseCase:
    """Use case for integrating one case and writing its outputs."""

    def __init__(self, event_bus: Optional[EventBus] = None):
        self.event_bus = event_bus or EventBus()

    def execute(self, request: RunSimulationRequest) -> RunSimulationResponse:
        """
        Execute the run.

        Steps:
        1. Build the numerical services and the initial (or restart) state
        2. Subscribe the output workers
        3. Advance with Strang steps, publishing one event per step
        4. Write case outputs and the manifest
        """
        config = request.config
        case = config.case
        run_id = str(uuid.uuid4())
        store = RunStore(config.output_dir).prepare()
        context = SimulationContext.build(case, config.linear_tol, config.max_linear_iterations)
        snapshots = SnapshotStore(context.complex)

        initial = init_case(case, context.projectors)
        if request.restart:
            state = snapshots.read(request.restart)
            store.start_diagnostics(keep_until_step=state.step)
            for name in (TraceWorker.U_FILE, TraceWorker.P_FILE, ModeEnergyWorker.FILE):
                store.truncate_trace(name, state.time)
            logger.info("restarting", extra={"run_id": run_id, "step": state.step,
                                             "snapshot": str(request.restart)})
        else:
            state = initial
            store.start_diagnostics()
        cfg = step_config_for(case, initial, config.picard_tol, config.picard_max_iters)
        final_step = case.n_steps

        workers = self._workers(config, context, store, snapshots, run_id, final_step, initial)
        if not request.restart:
            # step-0 outputs
            self.event_bus.publish(StepCompletedEvent(run_id, state))

        logger.info("run started", extra={
            "run_id": run_id, "case": case.name.value, "cells": list(case.cells),
            "dt": case.dt, "steps": final_step - state.step,
        })
        started = time.perf_counter()
        reference_mass = context.galerkin.integral_3(state.rho.coeffs)
        try:
            while state.step < final_step:
                state = context.integrator.strang_step(state, cfg)
                context.diagnostics.check_invariants(state, reference_mass, config.invariant_tol)
                self.event_bus.publish(StepCompletedEvent(run_id, state))
        except VrmhdError as e:
            logger.error("run aborted", extra={"run_id": run_id, "step": state.step, "error": str(e)})
            workers["snapshot"].write(state)
            self._write_manifest(store, config, context, run_id, "failed", state,
                                 time.perf_counter() - started, error=str(e))
            self.event_bus.publish(RunFinishedEvent(run_id, "failed", state.step, error=str(e)))
            raise

        self._case_outputs(case, context, store, state)
        self._write_manifest(store, config, context, run_id, "completed", state,
                             time.perf_counter() - started)
        self.event_bus.publish(RunFinishedEvent(run_id, "completed", state.step))
        logger.info("run finished", extra={"run_id": run_id, "steps": state.step, "time": state.time})
        return RunSimulationResponse(
            run_id=run_id,
            status="completed",
            steps=state.step,
            output_dir=store.root,
            final_state=state,
            message=f"{case.name.value}: {state.step} steps to t = {state.time:g}",
            context=context,
        )

    def _workers(self, config, context, store, snapshots, run_id, final_step, initial) -> dict:
        case = config.case
        workers = {
            "diagnostics": DiagnosticsWorker(store, context.diagnostics, config.diagnostics_every, final_step),
            "snapshot": SnapshotWorker(store, snapshots, self.event_bus, run_id,
                                       config.snapshot_every, final_step),
        }
        if case.name is CaseName.DISPERSION_1D:
            workers["traces"] = TraceWorker(store, context.diagnostics, config.trace_every)
        if case.name is CaseName.CURRENT_SHEET_2D:
            workers["modes"] = ModeEnergyWorker(store, context.diagnostics,
                                                case.parameter("modes", range(1, 19)),
                                                config.trace_every, b0=initial.B)
        subscribe_all(self.event_bus, workers.values())
        return workers

    @staticmethod
    def _case_outputs(case, context, store: RunStore, state: State):
        if case.name is CaseName.CURRENT_SHEET_1D:
            rows = context.diagnostics.erf_comparison(state, case)
            store.write_rows(ERF_FILE, ("x", "by_simulated", "by_reference", "error"), rows)
        if case.name is CaseName.ORSZAG_TANG_VR:
            from src.infrastructure.plotting.streamlines import plot_streamlines
            plot_streamlines(context.diagnostics, state, store.root / STREAMLINES_FILE)

    @staticmethod
    def _write_manifest(store: RunStore, config: RunConfig, context, run_id: str, status: str,
                        state: State, seconds: float, error: Optional[str] = None):
        store.write_manifest({
            "run_id": run_id,
            "status": status,
            "error": error,
            "config": to_plain(config.to_config()),
            "geometry": context.complex.describe(),
            "version": package_version(),
            "git": git_describe(),
            "final_step": state.step,
            "final_time": state.time,
            "wall_clock_seconds": seconds,
            "performance": context.integrator.performance_ledger(),
        })


def package_version() -> str:
    try:
        return version("vrmhd")
    except PackageNotFoundError:
        return "0+unknown"


def git_describe() -> Optional[str]:
    try:
        result = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                                text=True, timeout=5, check=False)
    except (OSError, subprocess.SubprocessError):
        return None
    return result.stdout.strip() or None
