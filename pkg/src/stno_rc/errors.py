"""Exception types shared across the package."""


class StnoRcError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(StnoRcError):
    """Invalid configuration value or combination of values."""


class DimensionMismatch(StnoRcError):
    """Operands have incompatible shapes or lengths."""


class OutOfRange(StnoRcError):
    """An index or sampling window falls outside the available data."""


class NotOscillating(StnoRcError):
    """An oscillating working point was requested below the threshold current."""


class SingularSystem(StnoRcError):
    """The readout normal equations are numerically singular."""
