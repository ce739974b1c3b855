"""Exception taxonomy shared across the package.

Two top-level families, matching the CLI exit-code contract:
ConfigurationError -> exit 2, NumericalError -> exit 3.
"""


class ConfigurationError(ValueError):
    """Invalid configuration, units, ranges, or input files."""


class DomainError(ConfigurationError):
    """A numeric argument lies outside the physically valid window."""


class FlatDataError(ConfigurationError):
    """Fit input with no usable variation (constant cross section)."""


class NumericalError(RuntimeError):
    """A solver failed to converge or produced an unusable result."""


class PoleProximityError(NumericalError):
    """Evaluation requested too close to a pole of the two-body amplitude."""

    def __init__(self, message: str, distance: float):
        super().__init__(message)
        self.distance = distance
