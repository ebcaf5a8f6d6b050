"""Exception taxonomy for the laboratory.

Computation errors derive from SolitonLabError so the CLI can map them to a
single nonzero exit code; usage problems stay ValueError/argparse territory.
"""


class SolitonLabError(RuntimeError):
    """Base class for failures of a numerical routine."""


class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class UnsupportedOrderError(ValueError):
    """Derivative order beyond what the model guarantees."""


class NoRootError(SolitonLabError):
    """Bracketed root search found no sign change."""


class InstabilityError(SolitonLabError):
    """Shooting integration blew up instead of decaying."""


class NoInternalModeError(SolitonLabError):
    """Scalar eigenvalue equation has no root in the admissible window."""


class DegenerateDenominatorError(SolitonLabError):
    """A denominator field dropped below its guaranteed lower bound."""


class IllConditionedError(SolitonLabError):
    """Iteration matrix norm at or above 1; refusing to solve."""


class BlowUpError(SolitonLabError):
    """Non-finite values appeared during time stepping."""


class DecompositionLostError(SolitonLabError):
    """Modulation Newton failed to converge within its iteration cap."""


class OracleFailure(SolitonLabError):
    """Cross-check oracle did not converge; report, do not abort the caller."""


class RegimeWarning(UserWarning):
    """Parameters outside the asymptotic regime the guarantees cover."""
