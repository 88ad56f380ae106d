"""Exception taxonomy shared by the solvers, diagnostics and the CLI.

Plain argument errors (bad exponent, negative radius, malformed config)
raise ValueError. The classes below mark failures of the numerical
machinery itself, so callers can distinguish "you asked for nonsense"
from "the solver could not deliver" from "the delivered object violates
a contract".
"""


class LaneEmdenError(Exception):
    """Base class for solver and diagnostic failures."""


class IntegrationError(LaneEmdenError):
    """The ODE integrator failed or exhausted its step budget."""


class BracketError(LaneEmdenError):
    """A shooting bracket does not straddle the target boundary condition."""


class IterationError(LaneEmdenError):
    """An iterative method (bisection, Newton) failed to converge."""


class ContinuationError(LaneEmdenError):
    """Branch following failed; carries the last good parameter pair."""

    def __init__(self, message, p=None, eps=None):
        super().__init__(message)
        self.p = p
        self.eps = eps


class StructureError(LaneEmdenError):
    """A solution does not have the expected sign or nodal structure."""


class InvariantViolation(LaneEmdenError):
    """A computed object fails one of its stated numerical contracts."""


class RangeError(LaneEmdenError, ValueError):
    """Requested evaluation outside the admissible range of a stored object."""
