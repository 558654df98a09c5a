"""
Entry point for the ``bdslab`` command.

Exit codes: 0 success, 1 validation error, 2 infeasible scenario, 3 capacity error.
"""

import sys
import time
from typing import Optional, Sequence

import structlog
from pydantic import ValidationError

from bdslab.cli.parser import parse_args
from bdslab.config import settings
from bdslab.exceptions import BDSLabError, InfeasibleScenarioError
from bdslab.jobs.reports import write_output
from bdslab.utils.logging import setup_logging

logger = structlog.get_logger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 1


def _validation_message(e: ValidationError) -> str:
    parts = []
    for error in e.errors():
        location = ".".join(str(part) for part in error["loc"]) or "input"
        parts.append(f"{location}: {error['msg']}")
    return "; ".join(parts)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Run one subcommand and return its exit code."""
    setup_logging()
    started = time.time()
    try:
        args = parse_args(argv)
        if args.log_level:
            setup_logging(args.log_level)
        logger.info("Running command", app_name=settings.app_name, command=args.command)
        text = args.handler(args)
        write_output(text, args.output)
    except InfeasibleScenarioError as e:
        logger.warning("Infeasible scenario", error=str(e), inequality=e.inequality)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except BDSLabError as e:
        logger.warning("Command failed", error=str(e), error_type=type(e).__name__)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except ValidationError as e:
        message = _validation_message(e)
        logger.warning("Validation failed", error=message)
        print(f"error: invalid parameters: {message}", file=sys.stderr)
        return EXIT_VALIDATION

    logger.info("Command finished", elapsed_s=round(time.time() - started, 3))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
