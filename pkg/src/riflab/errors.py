"""Exception and warning types raised across riflab."""

from __future__ import annotations


class RifError(Exception):
    """Base class for all riflab errors."""


class ValidationError(RifError):
    """Input polynomial does not define a valid (n,1) rational inner function."""


class NotStable(ValidationError):
    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NotDegreeOneInLast(ValidationError):
    pass


class ToralFactor(ValidationError):
    def __init__(self, message: str, factor=None):
        super().__init__(message)
        self.factor = factor


class InfiniteSingularSet(ValidationError):
    pass


class VerticalLine(RifError):
    pass


class DegenerateSlice(RifError):
    pass


class PoleAtPoint(RifError):
    pass


class NotInner(RifError):
    pass


class NonUnimodularEta(RifError):
    pass


class InfiniteSingularSetSuspected(RifError):
    pass


class PolydegreeDrop(RifError):
    pass


class OverlapError(RifError):
    pass


class NonFiniteIntegrand(RifError):
    pass


class BudgetExceeded(RifError):
    pass


class UnknownExample(RifError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class PolySyntaxError(RifError, ValueError):
    """Parse failure; ``offset`` is 0-based, ``line``/``column`` are 1-based."""

    def __init__(self, message: str, text: str = "", offset: int = 0):
        self.text = text
        self.offset = offset
        head = text[:offset]
        self.line = head.count("\n") + 1
        self.column = offset - (head.rfind("\n") + 1) + 1
        super().__init__(f"{message} (line {self.line}, column {self.column}, offset {offset})")
        self.msg = message


class UnknownVariable(PolySyntaxError):
    pass


class NonconstantExponent(PolySyntaxError):
    pass


class RifWarning(UserWarning):
    pass


class RootToleranceWarning(RifWarning):
    """A root sits between the unimodularity tolerance and the tie band."""


class CancellationUndetected(RifWarning):
    pass


class AtoralityHeuristicWarning(RifWarning):
    pass


class OrderAnomaly(RifWarning):
    """An exact contact order came out odd."""
