"""
Infrastructure layer - Persistence, Messaging and Plotting.
"""
from src.infrastructure.messaging.event_bus import EventBus
from src.infrastructure.persistence.run_store import RunStore
from src.infrastructure.persistence.snapshot_store import SnapshotStore

__all__ = [
    "EventBus",
    "RunStore",
    "SnapshotStore",
]
