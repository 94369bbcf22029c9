"""Typed refusals raised by the library.

Every error carries a short ``reason`` string (the class name) so that
callers such as the command-line front end can report it verbatim.
"""

from __future__ import annotations


class FriedrichsError(Exception):
    """Base class; ``reason`` is the machine-readable tag."""

    @property
    def reason(self) -> str:
        return type(self).__name__


# rational calculus
class ZeroPolynomial(FriedrichsError, ValueError):
    pass


class NotStrictlyProper(FriedrichsError, ValueError):
    pass


class NotL2(FriedrichsError, ValueError):
    pass


class BoundaryEvaluationRequiresSide(FriedrichsError, ValueError):
    pass


class InvalidSide(FriedrichsError, ValueError):
    pass


class NotInDomain(FriedrichsError, ValueError):
    pass


class ClosureMismatch(FriedrichsError, ArithmeticError):
    """Upper and lower contour closures disagree beyond tolerance."""


# model / M-function
class DVanishes(FriedrichsError, ArithmeticError):
    pass


class MPole(FriedrichsError, ArithmeticError):
    """The bracket defining the M-function vanishes: ``eigenvalue`` is in the point spectrum."""

    def __init__(self, eigenvalue: complex, message: str = ""):
        self.eigenvalue = complex(eigenvalue)
        super().__init__(message or f"EigenvalueAt({self.eigenvalue})")


class ContinuationUnavailable(FriedrichsError, ValueError):
    pass


# defect computations
class UnsupportedPsiPole(FriedrichsError, ValueError):
    pass


class DegenerateB(FriedrichsError, ValueError):
    pass


class NonGenericNotImplemented(FriedrichsError, NotImplementedError):
    pass


class WrongCase(FriedrichsError, ValueError):
    pass


class NothingToBorder(FriedrichsError, ValueError):
    pass


class NotAnEigenvalue(FriedrichsError, ValueError):
    pass


# atlas
class DegenerateLocus(FriedrichsError, ValueError):
    pass


class RegionResolutionTooCoarse(FriedrichsError, RuntimeError):
    pass


# oracle
class NearEssentialRange(FriedrichsError, ValueError):
    pass


class QuadratureFailure(FriedrichsError, RuntimeError):
    pass


# reconstruction
class TrivialModelDetected(FriedrichsError, ValueError):
    pass


class AsymptoticsFailed(FriedrichsError, RuntimeError):
    pass


class InconsistentData(FriedrichsError, ValueError):
    pass
