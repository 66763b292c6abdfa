"""Exception hierarchy shared across the package."""


class KvnError(Exception):
    """Base class for all package errors."""


class ConfigurationError(KvnError, ValueError):
    """Invalid parameters, grids, or experiment configuration."""


class ContractError(KvnError, ValueError):
    """A caller violated a documented precondition (shape, length, basis)."""


class TruncationError(KvnError, ValueError):
    """An occupancy vector exceeds the truncation order of its basis."""


class CapacityError(KvnError, MemoryError):
    """The requested object would exceed the configured memory cap."""


class SpectralLeakError(KvnError, ValueError):
    """Normalization is smaller than the operator's spectral norm."""


class EstimationError(KvnError, RuntimeError):
    """An iterative estimate did not converge.

    ``lower`` and ``upper`` carry the best bracket found.
    """

    def __init__(self, message, lower=float("nan"), upper=float("nan")):
        super().__init__(message)
        self.lower = lower
        self.upper = upper


class DecodeError(KvnError, ArithmeticError):
    """A KvN state cannot be read out (vacuum amplitude collapsed)."""


class DivergenceError(KvnError, ArithmeticError):
    """A time integration produced non-finite values or collapsed norm."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class MeasurementError(KvnError, ValueError):
    """A metric cannot be extracted from the supplied series."""
