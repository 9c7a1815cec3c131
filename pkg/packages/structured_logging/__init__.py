"""
Structured logging for the tagger.

Every module logs through ``get_logger(__name__)`` with snake_case events and
key=value context. Events go to stderr (stdout carries report tables) and
carry the run id of the current CLI invocation.
"""

import logging
import sys
from pathlib import Path

import structlog
from structlog.types import EventDict, Processor, WrappedLogger

from packages.run_manifest import get_run_id
from packages.tagger_settings import TaggerSettings


def add_run_id(logger: WrappedLogger, method_name: str, event_dict: EventDict) -> EventDict:
    """structlog processor: stamp the current run id onto the event, if one is set."""
    run_id = get_run_id()
    if run_id:
        event_dict["run_id"] = run_id
    return event_dict


def _processors(json_output: bool) -> list[Processor]:
    renderer: Processor = (
        structlog.processors.JSONRenderer() if json_output else structlog.dev.ConsoleRenderer()
    )
    return [
        structlog.contextvars.merge_contextvars,
        structlog.stdlib.filter_by_level,
        add_run_id,
        structlog.stdlib.add_logger_name,
        structlog.stdlib.add_log_level,
        structlog.processors.TimeStamper(fmt="iso"),
        structlog.processors.StackInfoRenderer(),
        structlog.processors.format_exc_info,
        structlog.processors.UnicodeDecoder(),
        renderer,
    ]


def setup_logging(
    level: str = "INFO",
    log_file: str | None = None,
    json_output: bool = False,
) -> None:
    """
    Route structlog through the stdlib root logger on stderr.

    Calling it again replaces the previous configuration, handlers included.

    Args:
        level: DEBUG, INFO, WARNING, ERROR or CRITICAL.
        log_file: Also append events to this file.
        json_output: One JSON object per event instead of console rendering.
    """
    level_names = getattr(logging, "getLevelNamesMapping", lambda: dict(logging._nameToLevel))()
    numeric_level = level_names.get(level.upper(), logging.INFO)
    logging.basicConfig(format="%(message)s", level=numeric_level, stream=sys.stderr, force=True)

    if log_file:
        path = Path(log_file)
        path.parent.mkdir(parents=True, exist_ok=True)
        handler = logging.FileHandler(path, encoding="utf-8")
        handler.setLevel(numeric_level)
        handler.setFormatter(logging.Formatter("%(message)s"))
        logging.getLogger().addHandler(handler)

    structlog.configure(
        processors=_processors(json_output),
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


def setup_logging_from_settings(settings: TaggerSettings) -> None:
    """Apply TAGGER_LOG_LEVEL, TAGGER_LOG_FILE and TAGGER_LOG_JSON."""
    setup_logging(settings.log_level, settings.log_file, settings.log_json)


def get_logger(name: str | None = None) -> structlog.stdlib.BoundLogger:
    """Bound logger for a module; pass ``__name__``."""
    return structlog.get_logger(name)


__all__ = [
    "add_run_id",
    "get_logger",
    "setup_logging",
    "setup_logging_from_settings",
]
