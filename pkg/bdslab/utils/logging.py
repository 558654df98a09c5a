"""
Structured logging configuration.
"""

import logging
import sys
from typing import Optional

import structlog
from structlog.types import Processor

from bdslab.config import settings


def setup_logging(level: Optional[str] = None) -> None:
    """
    Configure structured logging for the lab.

    Sets up structlog with colored console output for development
    and JSON output otherwise. Everything goes to stderr so that
    CSV/JSON results on stdout stay machine-readable.

    Args:
        level: Overrides ``settings.log_level`` when given (the ``--log-level`` flag).
    """
    log_level = (level or settings.log_level).upper()
    is_development = settings.app_env == "development" or settings.debug

    shared_processors: list[Processor] = [
        structlog.contextvars.merge_contextvars,
        structlog.processors.add_log_level,
        structlog.processors.StackInfoRenderer(),
        structlog.dev.set_exc_info,
        structlog.processors.TimeStamper(fmt="iso"),
    ]

    if is_development:
        processors = shared_processors + [
            structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty()),
        ]
    else:
        processors = shared_processors + [
            structlog.processors.dict_tracebacks,
            structlog.processors.JSONRenderer(),
        ]

    structlog.configure(
        processors=processors,
        wrapper_class=structlog.make_filtering_bound_logger(
            logging.getLevelName(log_level)
        ),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )

    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=logging.getLevelName(log_level),
    )

    # Quiet process-pool chatter at INFO
    logging.getLogger("concurrent.futures").setLevel(logging.WARNING)

    logger = structlog.get_logger(__name__)
    logger.debug(
        "Logging configured",
        level=log_level,
        environment=settings.app_env,
    )
