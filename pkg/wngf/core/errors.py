from __future__ import annotations

from typing import Optional


class WngfError(ValueError):
    """Base error. Renders as a single ``source:line: message`` line."""

    def __init__(self, message: str, *, source: Optional[str] = None, line: Optional[int] = None) -> None:
        super().__init__(message)
        self.message = message
        self.source = source
        self.line = line

    def with_source(self, source: str) -> "WngfError":
        if self.source is None:
            self.source = source
        return self

    def __str__(self) -> str:
        prefix = ""
        if self.source is not None:
            prefix = f"{self.source}:"
            if self.line is not None:
                prefix += f"{self.line}:"
            prefix += " "
        return f"{prefix}{self.message}"


class GraphError(WngfError):
    pass


class PartitionError(WngfError):
    pass


class InputFormatError(WngfError):
    pass


class OutputError(WngfError):
    pass


class DichotomizationError(WngfError):
    pass


class StatsError(WngfError):
    pass


class CountingError(WngfError):
    pass


class OracleMismatchError(CountingError):
    pass


class UsageError(WngfError):
    pass
