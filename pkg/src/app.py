"""
Application factory and configuration.
"""
from dataclasses import dataclass, field

from src.application.use_cases.compute_spectrum import ComputeSpectrumUseCase
from src.application.use_cases.run_simulation import RunSimulationUseCase
from src.application.use_cases.verify_case import VerifyCaseUseCase
from src.config.logging_setup import configure_from
from src.config.settings import get_config
from src.infrastructure.messaging.event_bus import EventBus


@dataclass
class Application:
    """Process configuration plus the use cases the CLI drives."""

    config: type
    event_bus: EventBus = field(default_factory=EventBus)

    def run_simulation(self) -> RunSimulationUseCase:
        return RunSimulationUseCase(self.event_bus)

    def verify_case(self) -> VerifyCaseUseCase:
        return VerifyCaseUseCase(RunSimulationUseCase(self.event_bus))

    def compute_spectrum(self) -> ComputeSpectrumUseCase:
        return ComputeSpectrumUseCase()


def create_app(config_name: str = None) -> Application:
    """Create and configure the application."""
    config = get_config(config_name)
    configure_from(config)
    return Application(config=config)
