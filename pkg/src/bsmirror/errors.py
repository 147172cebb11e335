"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid optical configuration."""


class OutOfRange(ConfigError):
    pass


class NegativeWeight(ConfigError):
    pass


class NonPositive(ConfigError):
    pass


class EmptyRange(ValueError):
    """A scan or sweep was requested over an empty or inverted range."""


class UnknownMode(KeyError):
    pass


class TruncationInsufficient(ValueError):
    """Fock cutoff too small for the requested coherent amplitude."""


class DimensionCap(ValueError):
    """Product Hilbert space would exceed the configured amplitude cap."""


class DimensionMismatch(ValueError):
    pass


class NegativeGain(ValueError):
    pass
