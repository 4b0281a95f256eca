"""
Run lifecycle events. The aggregate id is the run id.
"""
from src.domain.entities.diagnostics_record import DiagnosticsRecord
from src.domain.entities.state import State
from src.domain.events.domain_event import DomainEvent


class StepCompletedEvent(DomainEvent):
    """Event raised after every completed Strang step."""

    def __init__(self, run_id: str, state: State, record: DiagnosticsRecord = None, **kwargs):
        super().__init__("run.step_completed", run_id,
                         {"state": state, "record": record, "step": state.step, **kwargs})

    @property
    def state(self) -> State:
        return self.data["state"]

    @property
    def record(self) -> DiagnosticsRecord:
        return self.data["record"]


class SnapshotWrittenEvent(DomainEvent):
    """Event raised when a snapshot file has been flushed."""

    def __init__(self, run_id: str, path: str, step: int, **kwargs):
        super().__init__("run.snapshot_written", run_id, {"path": path, "step": step, **kwargs})


class RunFinishedEvent(DomainEvent):
    """Event raised when a run ends, successfully or not."""

    def __init__(self, run_id: str, status: str, steps: int, **kwargs):
        super().__init__("run.finished", run_id, {"status": status, "steps": steps, **kwargs})
