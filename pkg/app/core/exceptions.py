from typing import Any, Optional


class DomainError(Exception):
    """Base for every expected failure; `detail` is shown to the user."""

    def __init__(self, detail: str, details: Optional[Any] = None):
        super().__init__(detail)
        self.detail = detail
        self.details = details


class ConfigError(DomainError):
    """Invalid parameters, inputs or configuration documents."""


class NumericalError(DomainError):
    """A numerical procedure had to abort (divergence, non-finite values)."""


class StorageError(DomainError):
    """Unreadable or malformed files and other I/O failures."""
