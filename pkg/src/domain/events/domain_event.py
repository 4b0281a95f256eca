"""
Domain event base class for run lifecycle events.
"""
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Dict

_LOGGABLE = (str, int, float, bool)


@dataclass(init=False)
class DomainEvent:
    """A run event; the aggregate is the run and `data` holds its payload."""

    event_type: str
    aggregate_id: str
    data: Dict[str, Any]
    event_id: str = field(default_factory=lambda: str(uuid.uuid4()))
    timestamp: datetime = field(default_factory=lambda: datetime.now(timezone.utc))

    def __init__(self, event_type: str, aggregate_id: str, data: Dict[str, Any]):
        self.event_type = event_type
        self.aggregate_id = aggregate_id
        self.data = dict(data)
        self.event_id = str(uuid.uuid4())
        self.timestamp = datetime.now(timezone.utc)

    @property
    def run_id(self) -> str:
        return self.aggregate_id

    def summary(self) -> Dict[str, Any]:
        """Scalar payload entries (states, records and unset values left out) for log records."""
        scalars = {key: value for key, value in self.data.items() if isinstance(value, _LOGGABLE)}
        return {"event_type": self.event_type, "run_id": self.run_id, **scalars}
