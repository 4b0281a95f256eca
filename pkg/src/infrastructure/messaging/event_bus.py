"""
In-process event bus for run events.
"""
import logging
from typing import Callable, Dict, List

logger = logging.getLogger(__name__)


class EventBus:
    """Event bus for publishing and subscribing to domain events."""

    def __init__(self):
        self.subscribers: Dict[str, List[Callable]] = {}

    def subscribe(self, event_type: str, handler: Callable):
        """Subscribe to an event type."""
        self.subscribers.setdefault(event_type, []).append(handler)

    def publish(self, event):
        """Publish an event to all subscribers, in subscription order."""
        handlers = self.subscribers.get(event.event_type, [])
        logger.debug("publishing event", extra={**event.summary(), "handlers": len(handlers)})
        for handler in handlers:
            handler(event)

    def unsubscribe(self, event_type: str, handler: Callable):
        """Unsubscribe from an event type."""
        if handler in self.subscribers.get(event_type, []):
            self.subscribers[event_type].remove(handler)
