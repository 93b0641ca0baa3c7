"""Exception types shared across the package."""


class InputError(ValueError):
    """Malformed or dimensionally inconsistent user input."""


class NumericError(RuntimeError):
    """A numerical precondition failed (non-finite values, non-PD matrix, ...)."""


class OracleError(RuntimeError):
    """The independent reference solver failed to reach its tolerance."""


class StreamExhausted(Exception):
    """A finite estimate stream has no further snapshots."""
