import pytest
import typer
from unittest.mock import patch

from app.core.exceptions import ConfigError, NumericalError, StorageError
from app.core.global_error_handler import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_STORAGE,
    EXIT_UNEXPECTED,
    create_error_response,
    domain_exception_handler,
    exit_code_for,
    general_exception_handler,
    handle_command_errors,
)
from app.schemas.svt_schema import SvtParams


# --- Mocking dependencies ---
@pytest.fixture
def mock_logger():
    with patch("app.core.global_error_handler.logger") as mock:
        yield mock


@pytest.fixture
def mock_traceback():
    with patch("app.core.global_error_handler.traceback") as mock:
        mock.format_exc.return_value = "Mocked Traceback"
        yield mock


def failing(exc):
    @handle_command_errors
    def command():
        raise exc
    return command


# --- Test Cases ---

def test_create_error_response():
    assert create_error_response(EXIT_CONFIG, "Bad input") == {"message": "Bad input", "code": 2}
    assert create_error_response(EXIT_STORAGE, "Bad file", {"line": 3}) == {
        "message": "Bad file",
        "code": 4,
        "details": {"line": 3},
    }


@pytest.mark.parametrize(
    "exc, code",
    [
        (ConfigError("x"), EXIT_CONFIG),
        (NumericalError("x"), EXIT_NUMERICAL),
        (StorageError("x"), EXIT_STORAGE),
        (FileNotFoundError("x"), EXIT_STORAGE),
        (RuntimeError("x"), EXIT_UNEXPECTED),
    ],
)
def test_exit_code_for(exc, code):
    assert exit_code_for(exc) == code


def test_domain_exception_handler(mock_logger):
    response = domain_exception_handler("complete", NumericalError("SVT diverged", details={"iteration": 4}))
    assert response == {"message": "SVT diverged", "code": EXIT_NUMERICAL, "details": {"iteration": 4}}
    mock_logger.warning.assert_called_once()


def test_general_exception_handler(mock_logger, mock_traceback):
    response = general_exception_handler("sweep", RuntimeError("boom"))
    assert response == {"message": "An unexpected internal error occurred.", "code": EXIT_UNEXPECTED}
    mock_logger.error.assert_called_once()
    assert "Mocked Traceback" in mock_logger.error.call_args[0][0]


@pytest.mark.parametrize(
    "exc, code",
    [
        (ConfigError("bad fraction"), EXIT_CONFIG),
        (NumericalError("diverged"), EXIT_NUMERICAL),
        (StorageError("cannot read"), EXIT_STORAGE),
        (PermissionError("denied"), EXIT_STORAGE),
        (ZeroDivisionError("oops"), EXIT_UNEXPECTED),
    ],
)
def test_handle_command_errors_maps_exit_codes(mock_logger, capsys, exc, code):
    with pytest.raises(typer.Exit) as e:
        failing(exc)()
    assert e.value.exit_code == code
    assert capsys.readouterr().err.startswith("error: ")


def test_handle_command_errors_maps_validation_errors(mock_logger, capsys):
    @handle_command_errors
    def command():
        SvtParams(tau=-1.0, delta=3.0)

    with pytest.raises(typer.Exit) as e:
        command()
    assert e.value.exit_code == EXIT_CONFIG
    err = capsys.readouterr().err
    assert "tau" in err


def test_handle_command_errors_passes_results_through():
    @handle_command_errors
    def command(value):
        return value * 2

    assert command(21) == 42
