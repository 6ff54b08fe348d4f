class ConfigurationError(ValueError):
    """Invalid configuration: register size, grid budget, config file fields."""


class UsageError(ValueError):
    """A call violated an operation's preconditions."""


class InvariantError(RuntimeError):
    """An internal numerical invariant was breached."""
