"""Exception types shared across the package.

All inherit from ValueError so callers that only care about "bad input or
state" can catch one base class, while tests and the CLI can distinguish the
specific failure modes.
"""

from __future__ import annotations

__all__ = [
    "DomainError",
    "InfeasibleAssemblyError",
    "NoClosureError",
    "NaNPoisonError",
    "UnsupportedPrimitiveError",
]


class DomainError(ValueError):
    """A geometric quantity was requested outside its valid domain."""


class InfeasibleAssemblyError(ValueError):
    """The angle recursion left the reachable configuration space.

    Raised when the law-of-cosines argument exceeds [-1, 1] by more than the
    clamping tolerance: the requested aspect ratios cannot be assembled at the
    given actuation angle.
    """


class NoClosureError(ValueError):
    """The chain cannot close into a ring for the given aspect ratio."""


class NaNPoisonError(ArithmeticError):
    """A NaN appeared during a tape evaluation.

    Carries the index and description of the first offending operation so the
    failure can be traced to a specific primitive and recording context.
    """

    def __init__(self, op_index: int, op_name: str, label: str | None = None):
        self.op_index = op_index
        self.op_name = op_name
        self.label = label
        where = f" in {label}" if label else ""
        super().__init__(
            f"NaN produced by op #{op_index} ({op_name}){where}; "
            "inputs to this op were finite or NaN upstream"
        )


class UnsupportedPrimitiveError(TypeError):
    """An operation outside the differentiable primitive set was attempted."""
