"""Exception types shared across the package."""

__all__ = [
    "LeibnizError",
    "DegenerateDomain",
    "RootHasNoParent",
    "PointOutsideDomain",
    "NotShrinking",
    "SchemeViolation",
    "SchemeMismatch",
    "NonMonotoneStieltjes",
    "UnsupportedMeasureKind",
    "ZeroDifferentialAtAtom",
    "SelectorOutOfFraction",
    "HypothesisNotMet",
    "ToleranceNotReached",
    "ParseError",
    "DomainError",
    "NotShrinkingScheme",
]


class LeibnizError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateDomain(LeibnizError, ValueError):
    pass


class RootHasNoParent(LeibnizError, ValueError):
    pass


class PointOutsideDomain(LeibnizError, ValueError):
    pass


class NotShrinking(LeibnizError):
    """A monad or scheme does not reach the requested width."""


class SchemeViolation(LeibnizError):
    """A user-supplied partition level breaks cover, interior or parent rules."""


class SchemeMismatch(LeibnizError, ValueError):
    pass


class NonMonotoneStieltjes(LeibnizError, ValueError):
    pass


class UnsupportedMeasureKind(LeibnizError, TypeError):
    pass


class ZeroDifferentialAtAtom(LeibnizError, ZeroDivisionError):
    pass


class SelectorOutOfFraction(LeibnizError, ValueError):
    pass


class HypothesisNotMet(LeibnizError, ValueError):
    pass


class ToleranceNotReached(LeibnizError, ArithmeticError):
    pass


class ParseError(LeibnizError, ValueError):
    def __init__(self, message: str, position: int, expected: frozenset[str] = frozenset()):
        self.position = position
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected))
        super().__init__(f"{message} at position {position}" + (f" (expected one of: {exp})" if exp else ""))


class DomainError(LeibnizError, ArithmeticError):
    def __init__(self, message: str, node=None):
        self.node = node
        super().__init__(message)


class NotShrinkingScheme(NotShrinking):
    """Raised when a construction needs an infinitesimal scheme and the scheme
    visibly stops refining."""
