"""Exception hierarchy shared by all modules."""


class LrdTrendError(Exception):
    """Base class for errors raised by this package."""


class InvalidWaveletError(LrdTrendError, ValueError):
    """Refinement filter does not define a valid orthonormal scaling function."""


class DomainError(LrdTrendError, ValueError):
    """Argument outside the mathematical domain of a formula."""


class ConfigurationError(LrdTrendError, ValueError):
    """Inconsistent estimator or experiment configuration."""


class RegimeTieError(ConfigurationError):
    """(2**alpha - 1) * C_phi^2 and C_psi^2 coincide within tolerance."""


class NumericalError(LrdTrendError, RuntimeError):
    """A numerical procedure failed (non-PSD embedding, divergence, ...)."""


class DivergentIntegralError(NumericalError):
    """An integral keeps growing as its bounds are refined."""
