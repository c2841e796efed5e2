"""Exception hierarchy shared by every module of the package."""


class SecureASError(Exception):
    """Base class for all errors raised by :mod:`secureas`."""


class DimensionError(SecureASError, ValueError):
    """Array shapes disagree with the system configuration."""


class ConfigError(SecureASError, ValueError):
    """A configuration value violates its documented invariant."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NumericsError(SecureASError, ArithmeticError):
    """A dense linear-algebra routine failed (non-finite input, not PD, ...)."""


class BracketError(NumericsError):
    """The bisection bracket does not enclose a sign change."""


class InvariantError(SecureASError):
    """A mathematical invariant that must hold at feasible points was violated."""


class BisectionWarning(RuntimeWarning):
    """Bisection stopped on its iteration cap before reaching the tolerance."""
