"""
Logging configuration: JSON records by default, plain text on request.
"""
import logging
from typing import Optional

from pythonjsonlogger import jsonlogger

JSON_FIELDS = "%(asctime)s %(levelname)s %(name)s %(message)s"
TEXT_FORMAT = "%(asctime)s %(levelname)-8s %(name)s: %(message)s"


def configure_logging(level: str = "INFO", fmt: str = "json", log_file: Optional[str] = None):
    """Install handlers on the root logger once; later calls replace them."""
    if fmt == "json":
        formatter = jsonlogger.JsonFormatter(JSON_FIELDS)
    else:
        formatter = logging.Formatter(TEXT_FORMAT)

    handlers = [logging.StreamHandler()]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, "_vrmhd", False):
            root.removeHandler(handler)
    for handler in handlers:
        handler.setFormatter(formatter)
        handler._vrmhd = True
        root.addHandler(handler)
    root.setLevel(level.upper())


def configure_from(config) -> None:
    configure_logging(config.LOG_LEVEL, config.LOG_FORMAT, config.LOG_FILE)
