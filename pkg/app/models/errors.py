# app/models/errors.py
from __future__ import annotations


class LagrangeError(Exception):
    """Root of every error raised by this package."""


class ConfigError(LagrangeError):
    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
