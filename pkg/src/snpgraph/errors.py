"""Exception types shared across the package.

Errors fall into three groups: input validation (bad arcs, bad weights,
malformed files), precondition violations (an operation was handed a graph
outside its hypothesis), and internal invariant failures.  The last group
(`CertificateFailedError`, `CountingMismatchError`, `WeightDroppedError`,
`NotGoodAfterCompletionError`) must never fire on valid inputs; any such
failure indicates a bug and is never swallowed.
"""

from __future__ import annotations


class GraphError(Exception):
    """Base class for all errors raised by this package."""


# --- input validation -------------------------------------------------------

class LoopArcError(GraphError):
    """An arc (v, v) was supplied."""


class DigonArcError(GraphError):
    """Both (u, v) and (v, u) were supplied; digons are not allowed."""


class BadWeightError(GraphError):
    """A vertex weight is not strictly positive."""


class OutOfRangeError(GraphError):
    """A vertex index is outside 0..n-1."""


class NotMissingError(GraphError):
    """A pair that is required to be a missing edge is not one."""


class NotPermutationError(GraphError):
    """A sequence that must permute the vertex set does not."""


class ParseError(GraphError):
    """A graph file could not be parsed; carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# --- precondition violations -------------------------------------------------

class TooLargeError(GraphError):
    """Instance exceeds the exact-solver or enumeration cap."""


class NotGoodEdgeError(GraphError):
    """A missing edge required to be good is not good."""


class NotGoodDigraphError(GraphError):
    """The graph is not a good digraph (some block is not an interval)."""


class NotTwoStarsError(GraphError):
    """The missing graph is not a union of at most two stars."""


class SinkPresentError(GraphError):
    """The graph has a sink, so the two-vertex theorem does not apply."""


class HypothesisFailedError(GraphError):
    """A theorem hypothesis does not hold for this instance."""


class InfeasibleError(GraphError):
    """Requested instance parameters cannot be realized."""


class NotFoundError(GraphError):
    """A structured search finished without finding an instance."""

    def __init__(self, k: int, message: str = ""):
        self.k = k
        super().__init__(message or f"no certified instance found for k={k}")


class IterBudgetExceededError(GraphError):
    """Sedimentation iteration exceeded its budget."""


class UnknownTargetError(GraphError):
    """Verification target name is not registered."""


# --- invariant failures (bug signals) ----------------------------------------

class IntervalOptimalityMismatchError(GraphError):
    """Block-contiguous optimum differs from the unconstrained optimum."""


class WeightDroppedError(GraphError):
    """A rearrangement changed the forward weight; this must never happen."""


class NotGoodAfterCompletionError(GraphError):
    """The completed digraph failed the good-digraph check."""


class CertificateFailedError(GraphError):
    """A constructed vertex fails the second neighborhood property check."""


class CountingMismatchError(GraphError):
    """A counting identity required by the double-cycle analysis failed."""
