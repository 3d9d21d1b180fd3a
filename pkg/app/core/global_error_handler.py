import functools
import logging
import traceback
from typing import Any, Callable, Optional

import typer
from pydantic import ValidationError

from app.core.exceptions import ConfigError, DomainError, NumericalError, StorageError

logger = logging.getLogger(__name__)

EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_STORAGE = 4


# Define a standard error response format
def create_error_response(code: int, message: str, details: Optional[Any] = None) -> dict:
    response = {
        "message": message,
        "code": code,
    }
    if details:
        response["details"] = details
    return response


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, (ConfigError, ValidationError)):
        return EXIT_CONFIG
    if isinstance(exc, NumericalError):
        return EXIT_NUMERICAL
    if isinstance(exc, (StorageError, OSError)):
        return EXIT_STORAGE
    return EXIT_UNEXPECTED


def domain_exception_handler(command: str, exc: DomainError) -> dict:
    """Handles expected failures: config, numerical aborts, storage."""
    code = exit_code_for(exc)
    logger.warning(f"{type(exc).__name__}: {exc.detail} in command '{command}'")
    return create_error_response(code=code, message=exc.detail, details=exc.details)


def validation_exception_handler(command: str, exc: ValidationError) -> dict:
    """Handles parameter combinations rejected by the schemas."""
    messages = [
        f"{'.'.join(map(str, error['loc'])) or 'value'}: {error['msg']}" for error in exc.errors()
    ]
    logger.warning(f"Validation Error: {messages} in command '{command}'")
    return create_error_response(code=EXIT_CONFIG, message=messages[0], details={"errors": messages})


def io_exception_handler(command: str, exc: OSError) -> dict:
    logger.warning(f"I/O Error: {exc} in command '{command}'")
    return create_error_response(code=EXIT_STORAGE, message=str(exc))


def general_exception_handler(command: str, exc: Exception) -> dict:
    """Handles any other unhandled exceptions."""
    # Log the full traceback for internal debugging
    logger.error(f"Unhandled Exception: {exc}\n{traceback.format_exc()} in command '{command}'")
    return create_error_response(
        code=EXIT_UNEXPECTED,
        message="An unexpected internal error occurred.",
    )


def handle_command_errors(func: Callable) -> Callable:
    """Wraps a CLI command so failures print a diagnostic and exit with the mapped code."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        command = func.__name__
        try:
            return func(*args, **kwargs)
        except typer.Exit:
            raise
        except DomainError as exc:
            response = domain_exception_handler(command, exc)
        except ValidationError as exc:
            response = validation_exception_handler(command, exc)
        except OSError as exc:
            response = io_exception_handler(command, exc)
        except Exception as exc:
            response = general_exception_handler(command, exc)

        typer.echo(f"error: {response['message']}", err=True)
        details = response.get("details")
        if isinstance(details, dict):
            for extra in details.get("errors", [])[1:]:
                typer.echo(f"error: {extra}", err=True)
        raise typer.Exit(code=response["code"])

    return wrapper
