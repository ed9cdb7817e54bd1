"""Exception hierarchy shared by every compiler stage."""

from __future__ import annotations


class TypalError(Exception):
    """Base class for all user-facing errors."""

    def __init__(self, message: str, pos: tuple[int, int] | None = None):
        self.message = message
        self.pos = pos
        if pos is not None:
            message = f"{pos[0]}:{pos[1]}: {message}"
        super().__init__(message)


class ParseError(TypalError):
    def __init__(self, message: str, pos: tuple[int, int] | None = None,
                 expected: frozenset[str] = frozenset()):
        self.expected = expected
        if expected:
            message = f"{message} (expected one of: {', '.join(sorted(expected))})"
        super().__init__(message, pos)


class TypeCheckError(TypalError):
    pass


class DomainTooLarge(TypalError):
    pass


class DecodeError(TypalError):
    pass


class EvalError(TypalError):
    """Raised by the reference interpreter (inexact division, undefined index)."""


class ActionError(TypalError):
    """Action not applicable (precondition or range guard) in a given state."""


class WriteConflict(TypalError):
    pass


class CapExceeded(TypalError):
    def __init__(self, message: str, cap: int):
        self.cap = cap
        super().__init__(message)


class PlanError(TypalError):
    """Malformed plan file or broken auxiliary chain."""
