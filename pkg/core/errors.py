"""errors.py

Exception hierarchy shared by every package.

Library code raises these; only `app_controller.main` turns them into exit codes.
"""

from __future__ import annotations


EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_MISMATCH = 4


class XplainError(Exception):
    """Base class. `exit_code` is what the CLI returns for this failure."""

    exit_code: int = EXIT_UNEXPECTED


class ConfigError(XplainError):
    exit_code = EXIT_CONFIG

    def __init__(self, message: str, *, line: int | None = None, field: str | None = None) -> None:
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class ArtifactIOError(XplainError):
    exit_code = EXIT_IO


class DataMismatchError(XplainError):
    exit_code = EXIT_MISMATCH


class ContractViolation(XplainError, ValueError):
    """A caller broke a precondition (bad index, terminal source, NaN input)."""


class SingularSystemError(ContractViolation):
    pass
