"""Exception types shared across the package."""


class PMPError(Exception):
    """Base class for every error raised by this package."""


class ChartViolation(PMPError):
    """The group logarithm was requested outside its injectivity chart."""


class DomainViolation(PMPError):
    """A model precondition (e.g. ``|s v| < 1``) failed at some stage."""

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage


class NumericalBreakdown(PMPError):
    """Non-finite values appeared where finite ones are required."""


class SingularJacobian(PMPError):
    """Linear solve failed even after the regularised retry."""


class GameIllPosed(PMPError):
    """The Riccati recursion left the region where a saddle point exists."""


class ConfigError(PMPError):
    """Base class for configuration problems."""


class ParseError(ConfigError):
    def __init__(self, message, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class UnknownPreset(ConfigError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key):
        super().__init__(f"unknown configuration key {key!r}")
        self.key = key
