"""Shared error types raised by the kernel, elaborator, and frontend."""

from __future__ import annotations


class HottError(Exception):
    """Base class for all checker errors."""

    def __init__(self, message: str, span=None):
        super().__init__(message)
        self.message = message
        self.span = span


class UniverseInconsistency(HottError):
    """The universe constraint store has a cycle with a strict edge."""

    def __init__(self, message: str, cycle=None, span=None):
        super().__init__(message, span)
        self.cycle = list(cycle) if cycle else []


class LevelArityError(HottError):
    """Wrong number of universe levels supplied to a definition."""


class ScopeError(HottError):
    """A de Bruijn index escapes its binders, or a shift would underflow."""


class TypeMismatch(HottError):
    def __init__(self, expected, got, span=None, message=None):
        self.expected = expected
        self.got = got
        super().__init__(message or "type mismatch", span)


class UnboundVariable(HottError):
    pass


class NotAFunction(HottError):
    pass


class NotASigma(HottError):
    pass


class UnknownName(HottError):
    pass


class DuplicateName(HottError):
    pass


class UnificationFailure(HottError):
    pass


class OccursCheck(UnificationFailure):
    pass


class UnsolvedHole(HottError):
    pass


class InstanceNotFound(HottError):
    pass


class InstanceDepthExceeded(HottError):
    pass


class ParseError(HottError):
    pass


class ImportCycle(HottError):
    def __init__(self, message: str, cycle=None, span=None):
        super().__init__(message, span)
        self.cycle = list(cycle) if cycle else []


class IoError(HottError):
    pass
