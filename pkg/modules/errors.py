"""
Exception hierarchy shared by every module.

Everything derives from AuditError (a ValueError), so callers can catch either.
The CLI maps AuditError to exit code 1.
"""

from typing import Optional


class AuditError(ValueError):
    """Base class for all audit-tool errors."""


class ParseError(AuditError):
    """Malformed input file. Carries path/line/field context when known."""

    def __init__(
        self,
        message: str,
        path: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.path = path
        self.line = line
        self.field = field
        context = []
        if path:
            context.append(str(path))
        if line is not None:
            context.append(f"line {line}")
        if field:
            context.append(f"field '{field}'")
        prefix = f"{': '.join(context)}: " if context else ""
        super().__init__(f"{prefix}{message}")


class ValidationError(AuditError):
    """Input parsed but violates a structural invariant."""


class InvalidWindow(AuditError):
    """Audit window with start after end."""


# ── Metric errors ────────────────────────────────────────────
class MetricError(AuditError):
    """A metric could not be computed from its inputs."""


class DivisionByZero(MetricError):
    pass


class EmptyInput(MetricError):
    pass


class NegativeResult(MetricError):
    pass


class InvalidInput(MetricError):
    pass


# ── Reporting / fixtures ─────────────────────────────────────
class MismatchedReports(AuditError):
    """Two reports from different data centers or audit modes."""


class InfeasibleProfile(AuditError):
    """Fixture profile that no inventory layout can realise."""


class IoError(AuditError, OSError):
    """Writing a report or export failed."""
