"""Exception hierarchy.

``InvalidInput`` subclasses describe bad data supplied by the caller (the CLI
maps them to exit code 2); ``ComputationError`` subclasses describe failures
of the library itself (exit code 1).
"""

from __future__ import annotations


class DoublingLabError(Exception):
    pass


class InvalidInput(DoublingLabError, ValueError):
    invariant = "input"


class ComputationError(DoublingLabError, RuntimeError):
    pass


class NotSquare(InvalidInput):
    invariant = "square matrix"


class AsymmetricMatrix(InvalidInput):
    invariant = "symmetry d(x,y) = d(y,x)"


class NegativeOrZeroOffDiagonal(InvalidInput):
    invariant = "positivity d(x,y) > 0 for x != y"


class NonzeroDiagonal(InvalidInput):
    invariant = "d(x,x) = 0"


class TriangleViolation(InvalidInput):
    invariant = "triangle inequality"

    def __init__(self, triple: tuple[int, int, int], message: str | None = None):
        self.triple = triple
        i, j, k = triple
        super().__init__(message or f"d({i},{k}) > d({i},{j}) + d({j},{k}) for triple {triple}")


class NonFiniteDistance(InvalidInput):
    invariant = "finite distances"


class SinglePointSpace(InvalidInput):
    invariant = "at least two points"


class DomainError(InvalidInput):
    invariant = "argument domain"


class NonPositiveWeight(InvalidInput):
    invariant = "strictly positive weights"


class EmptyAnnulus(InvalidInput):
    invariant = "nonempty annulus B(x,2r) \\ B(x,r)"


class SpaceTooLarge(InvalidInput):
    invariant = "space size limit"


class WitnessInvalid(InvalidInput):
    invariant = "certificate witness"


class DuplicatePoints(InvalidInput):
    invariant = "distinct points"


class InvalidEpsilon(InvalidInput):
    invariant = "0 < epsilon < 1"


class InvalidParameters(InvalidInput):
    invariant = "family parameters"


class DisconnectedGraph(InvalidInput):
    invariant = "connected graph"


class InvalidAlpha(InvalidInput):
    invariant = "alpha > -1"


class InputFileError(InvalidInput):
    invariant = "readable JSON or edge-list input"


class NumericalFailure(ComputationError):
    pass


class SearchBudgetExceeded(ComputationError):
    pass
