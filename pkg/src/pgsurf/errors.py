"""Exception hierarchy shared across the package."""


class PGSurfError(Exception):
    """Base class for all pg-surf errors."""


class LightlikeSurface(PGSurfError):
    """Side tangent norm W is (numerically) zero; curvature is undefined."""


class LightlikeLocus(PGSurfError):
    """A specialized curvature formula hit a vanishing denominator."""


class InadmissiblePatch(PGSurfError):
    """Both x-partials vanish; the tangent plane is pseudo-Euclidean."""


class InvalidParams(PGSurfError, ValueError):
    """A constructor received parameters outside its stated preconditions."""


class DomainError(PGSurfError):
    """Evaluation requested outside the valid domain (e.g. negative radicand)."""


class BranchViolation(PGSurfError):
    """An ODE integration left (or started on) its declared causal branch."""


class BlowUp(PGSurfError):
    """The integrator state exceeded the blow-up guard mid-corridor."""


class GridRejected(PGSurfError):
    """A grid operation found lightlike or inadmissible points in the grid."""


class ConfigError(PGSurfError):
    """CLI configuration is malformed or violates an invariant."""
