"""Exception hierarchy shared by all modules."""


class TwoMicroError(Exception):
    """Base class for library errors."""


class AliasError(TwoMicroError):
    """A requested frequency is not representable on the grid."""


class SpecError(TwoMicroError, ValueError):
    """Invalid localizer or symbol specification."""


class DepthError(TwoMicroError):
    """Derivatives of the requested depth are unavailable."""


class ExpansionError(TwoMicroError):
    """Symbol has no declared h-expansion."""


class CapError(TwoMicroError):
    """Dense representation would exceed the configured size cap."""


class MismatchError(TwoMicroError, ValueError):
    """Operands live on different grids or at different h."""


class ConvergenceError(TwoMicroError):
    """An iterative method hit its iteration cap."""


class DataError(TwoMicroError, ValueError):
    """Not enough (or malformed) data for a regression."""


class ExtrapolationError(TwoMicroError):
    """Richardson extrapolation did not settle."""


class ResolutionError(TwoMicroError, ValueError):
    """Scan cells and localizer widths do not form a cover."""


class GeneratorError(TwoMicroError, ValueError):
    """A generator symbol does not vanish on the Lagrangian."""


class RationalityError(TwoMicroError, TypeError):
    """Exact rational input was required."""


class ConfigError(TwoMicroError, ValueError):
    """Experiment configuration failed validation."""


class AliasWarning(UserWarning):
    """Symbol x-bandwidth visibly exceeds the grid."""
