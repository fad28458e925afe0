"""Exception types shared across the package."""


class InputError(ValueError):
    """Bad argument: wrong dimension, nonpositive size, malformed file."""


class ProtocolError(RuntimeError):
    """A learner was called out of its features -> label order."""


class InvariantError(RuntimeError):
    """Internal state violated an invariant that should be unbreakable."""


class ConfigError(ValueError):
    """Experiment configuration is invalid."""
