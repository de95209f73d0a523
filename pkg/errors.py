"""
Exception hierarchy for gapdiag.

Every error names the module that raised it and the invariant (or
precondition) that failed, so the CLI can emit machine-readable failure lists.
"""

from typing import Dict


class GapdiagError(Exception):
    """Base class for all gapdiag errors"""

    def __init__(self, message: str, module: str = "gapdiag", invariant: str = "unspecified"):
        super().__init__(message)
        self.message = message
        self.module = module
        self.invariant = invariant

    def to_dict(self) -> Dict[str, str]:
        """Failure entry for reports"""
        return {
            'module': self.module,
            'invariant': self.invariant,
            'message': self.message,
        }

    def __str__(self) -> str:
        return f"[{self.module}:{self.invariant}] {self.message}"


class InputError(GapdiagError):
    """Malformed, non-finite or inconsistently shaped input"""


class PreconditionError(GapdiagError):
    """A documented precondition of an operation does not hold"""


class InvariantViolation(GapdiagError):
    """A post-condition check exceeded its tolerance"""


class ConvergenceError(GapdiagError):
    """Quadrature, series or search failed to converge"""
