"""
Output workers. Each subscribes to run events on the EventBus and writes
one kind of run output.
"""
import logging
from typing import Optional, Sequence

from src.domain.events.run_events import SnapshotWrittenEvent, StepCompletedEvent
from src.domain.services.diagnostics import Diagnostics
from src.infrastructure.persistence.run_store import RunStore
from src.infrastructure.persistence.snapshot_store import SnapshotStore

logger = logging.getLogger(__name__)

STEP_COMPLETED = "run.step_completed"


def _due(step: int, every: int, final_step: int) -> bool:
    return step % every == 0 or step == final_step


class DiagnosticsWorker:
    """Appends a diagnostics.csv row every `every` steps."""

    def __init__(self, store: RunStore, diagnostics: Diagnostics, every: int, final_step: int):
        self.store = store
        self.diagnostics = diagnostics
        self.every = every
        self.final_step = final_step
        self.last_record = None

    def handle_step(self, event: StepCompletedEvent):
        state = event.state
        if not _due(state.step, self.every, self.final_step):
            return
        record = event.record or self.diagnostics.record(state)
        self.store.append_diagnostics(record)
        self.last_record = record
        logger.debug("diagnostics row", extra={"step": state.step, "time": state.time,
                                               "e_total": record.e_total})


class SnapshotWorker:
    """Writes snapshots every `every` steps and remembers the last one."""

    def __init__(self, store: RunStore, snapshots: SnapshotStore, event_bus, run_id: str,
                 every: int, final_step: int):
        self.store = store
        self.snapshots = snapshots
        self.event_bus = event_bus
        self.run_id = run_id
        self.every = every
        self.final_step = final_step
        self.last_path = None
        self.last_step = None

    def handle_step(self, event: StepCompletedEvent):
        state = event.state
        if _due(state.step, self.every, self.final_step):
            self.write(state)

    def write(self, state):
        if self.last_step == state.step:
            return self.last_path
        path = self.snapshots.write(state, self.store.snapshot_path(state.step))
        self.last_path, self.last_step = path, state.step
        self.event_bus.publish(SnapshotWrittenEvent(self.run_id, str(path), state.step))
        logger.info("snapshot written", extra={"step": state.step, "path": str(path)})
        return path


class TraceWorker:
    """Line traces of u_z (shear Alfven) and p (magnetosonic) for the space-time spectra."""

    U_FILE = "traces_u.csv"
    P_FILE = "traces_p.csv"

    def __init__(self, store: RunStore, diagnostics: Diagnostics, every: int,
                 points_per_cell: int = 2):
        self.store = store
        self.diagnostics = diagnostics
        self.every = every
        self.points_per_cell = points_per_cell

    def handle_step(self, event: StepCompletedEvent):
        if event.state.step % self.every == 0:
            self.write(event.state)

    def write(self, state):
        x, u_z = self.diagnostics.line_trace(state.u, component=2, points_per_cell=self.points_per_cell)
        _, p = self.diagnostics.pressure_trace(state, points_per_cell=self.points_per_cell)
        self.store.append_trace(self.U_FILE, state.time, x, u_z)
        self.store.append_trace(self.P_FILE, state.time, x, p)


class ModeEnergyWorker:
    """Magnetic energy of the excited x-modes, one row per recorded step."""

    FILE = "mode_energies.csv"

    def __init__(self, store: RunStore, diagnostics: Diagnostics, modes: Sequence[int],
                 every: int, b0=None):
        self.store = store
        self.diagnostics = diagnostics
        self.modes = list(modes)
        self.every = every
        self.b0 = b0

    def handle_step(self, event: StepCompletedEvent):
        if event.state.step % self.every == 0:
            self.write(event.state)

    def write(self, state):
        b = state.B if self.b0 is None else state.B - self.b0
        energies = self.diagnostics.mode_energies(b, self.modes)
        self.store.append_trace(self.FILE, state.time, self.modes,
                                [energies[n] for n in self.modes])


def subscribe_all(event_bus, workers: Sequence[Optional[object]]):
    for worker in workers:
        if worker is not None:
            event_bus.subscribe(STEP_COMPLETED, worker.handle_step)
