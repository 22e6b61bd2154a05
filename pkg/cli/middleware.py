import functools
import logging
import sys
from typing import Callable

from pydantic import ValidationError

from core.exceptions import AlgebraInvariantError, ConvergenceError, ProblemValidationError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_NOT_CONVERGED = 3


def _config_message(e: ValidationError) -> str:
    error = e.errors()[0]
    path = ".".join(str(part) for part in error["loc"])
    return f"{path}: {error['msg']}" if path else error["msg"]


def handle_errors(command: Callable[..., int]) -> Callable[..., int]:
    """Map service failures of a command to its exit code"""

    @functools.wraps(command)
    def wrapper(*args, **kwargs) -> int:
        try:
            return command(*args, **kwargs)
        except ConvergenceError as e:
            print(f"❌ Not converged: {e}", file=sys.stderr)
            return EXIT_NOT_CONVERGED
        except ProblemValidationError as e:
            print(f"❌ Invalid problem: {e}", file=sys.stderr)
            return EXIT_CONFIG
        except ValidationError as e:
            print(f"❌ Invalid configuration: {_config_message(e)}", file=sys.stderr)
            return EXIT_CONFIG
        except ValueError as e:
            print(f"❌ {e}", file=sys.stderr)
            return EXIT_CONFIG
        except AlgebraInvariantError as e:
            logger.error(f"❌ Algebra invariant violated: {e}")
            print(f"❌ Algebra invariant violated: {e}", file=sys.stderr)
            return EXIT_FAILED

    return wrapper
