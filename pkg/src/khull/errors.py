"""Exception and warning types shared across the toolkit."""


class KhullError(Exception):
    """Base class for toolkit errors."""


class DomainError(KhullError):
    """An input lies outside the domain of validity of an operation."""


class UnsupportedKindError(KhullError):
    """The operation is not defined for this body kind."""


class ConfigError(KhullError):
    """Invalid experiment configuration."""


class NumericError(KhullError):
    """A numeric routine failed to reach its accuracy or certification target."""


class GeneralPositionError(KhullError):
    """A sample failed the general-position diagnostic."""

    def __init__(self, report):
        super().__init__(f"general position violated: {report.describe()}")
        self.report = report


class GeneralPositionWarning(UserWarning):
    """Near-degenerate configuration detected (near-tangent or near-cocircular)."""
