"""CLI utilities."""

import sys
from functools import wraps

from pydantic import ValidationError
from rich.console import Console
from rich.markup import escape

from fedflip.errors import ConfigError, FedFlipError
from fedflip.utils.logging import get_logger

logger = get_logger(__name__)

err_console = Console(stderr=True)

RUNTIME_EXIT = 3


def _fail(message: object, exit_code: int) -> None:
    err_console.print(f"[red]error:[/red] {escape(str(message))}", highlight=False)
    sys.exit(exit_code)


def handle_errors(f):
    """Turn domain errors into a one-line message and the matching exit status."""
    @wraps(f)
    def wrapper(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except FedFlipError as e:
            _fail(e, e.exit_code)
        except ValidationError as e:
            _fail(e, ConfigError.exit_code)
        except Exception as e:
            logger.exception("Unexpected failure")
            _fail(e, RUNTIME_EXIT)
    return wrapper
