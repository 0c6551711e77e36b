import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from cli.controllers import EXIT_INVALID, EXIT_NOT_CONVERGED, EXIT_SINGULAR
from cli.routes import build_parser, dispatch, resolve_config
from config import settings
from core.errors import ConvergenceError, SingularSystemError
from utils.logger import configure_logging

logger = logging.getLogger(__name__)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level or settings.log_level)

    try:
        config = resolve_config(args)
        return dispatch(config)
    except ValidationError as exc:
        logger.error(f"Invalid configuration: {exc}")
        return EXIT_INVALID
    except SingularSystemError as exc:
        logger.error(f"Singular system: {exc}")
        return EXIT_SINGULAR
    except ConvergenceError as exc:
        logger.error(f"No convergence after {exc.iterations} iterations: {exc}")
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        logger.error(f"Invalid input: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
