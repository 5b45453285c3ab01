"""Exception types shared across the package."""


class SplitsimError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(SplitsimError, ValueError):
    """A caller-supplied value violates an operation's precondition."""


class ResourceLimitError(SplitsimError):
    """Requested simulation exceeds the desk-scale width caps."""


class InvalidCutError(InvalidArgumentError):
    """A cut plan is malformed or induces a cyclic fragment dependency."""


class IncompleteResultsError(SplitsimError):
    """Reconstruction was given fewer results than subexperiments."""


class NumericError(SplitsimError):
    """A numeric procedure failed (singular calibration, broken kernel)."""


class CapacityError(SplitsimError):
    """A job does not fit the machine it was dispatched to."""


class ConfigError(SplitsimError):
    """A fleet or scenario configuration file is invalid."""


class SchemaError(ConfigError):
    """An input file does not match the expected column schema."""


class ParseError(ConfigError):
    """An input file could not be parsed at all."""
