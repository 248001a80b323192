"""Exception taxonomy for the mcrd_layers pipeline.

Every failure mode that callers are expected to catch gets its own class so
batch drivers can map it to a structured error report instead of a traceback.
"""


class McrdError(Exception):
    """Base class for all domain errors raised by this package."""


class OrderUnavailable(McrdError):
    """A partial derivative beyond the reaction's supported order was requested."""


class NoBistability(McrdError):
    """f(., v) does not have three simple real roots with the (-,+,-) pattern."""


class SignPatternViolation(McrdError):
    """Three real roots exist but f_u has the wrong signs at them."""


class NoMassBalance(McrdError):
    """The balance integral J(v) has constant sign on the bistable window."""


class DegenerateBalance(McrdError):
    """|J'(v*)| is below threshold; the balanced value is degenerate."""


class NoConvergence(McrdError):
    """An iterative solver exhausted its iteration budget."""


class DomainTooSmall(McrdError):
    """The truncated z-domain does not contain the wave tails to tolerance."""


class StageOrderViolation(McrdError):
    """An expansion stage was requested before its prerequisites were finalized."""


class SolvabilityViolation(McrdError):
    """The right-hand side is not orthogonal to the translation mode."""


class IndependenceViolation(McrdError):
    """A solvability constant changed when the free parameter below it moved."""


class DegenerateJump(McrdError):
    """h^+(v*) - h^-(v*) is numerically zero; the layer jump is degenerate."""


class MassOutOfRange(McrdError):
    """The prescribed mean mass M lies outside the admissible open interval."""


class GridTooCoarse(McrdError):
    """The radial grid resolves the layer with fewer nodes than required."""


class SingularJacobian(McrdError):
    """Tridiagonal factorization broke down or the rank-one denominator vanished."""


class NoRootInWindow(McrdError):
    """The secular function has no sign change in the scanned window."""


class MultipleRoots(McrdError):
    """More than one secular root in the window; uniqueness is violated."""


class IterationStall(McrdError):
    """The eigenvalue iteration failed to lock onto the requested pair."""


class ConfigInvalid(McrdError):
    """A run configuration failed validation."""


class IoFailure(McrdError):
    """Writing a report artifact failed."""
