"""Exception taxonomy shared across the package."""


class AffineFourierError(Exception):
    """Common base so callers can catch any package-raised failure."""


class ContractViolation(AffineFourierError, ValueError):
    """An argument violates a structural contract (wrong tag, bad shape, det != 1)."""


class DomainError(AffineFourierError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class ConfigurationError(AffineFourierError, ValueError):
    """A run configuration or rule parameter set is invalid."""


class PreconditionError(AffineFourierError, ValueError):
    """A numerical precondition (boundary decay, Nyquist consistency) fails."""


class UnsupportedFeatureError(AffineFourierError, NotImplementedError):
    """Requested functionality is outside the supported scope (e.g. SO(n), n >= 4)."""


class BudgetExceededError(AffineFourierError, RuntimeError):
    """A report exceeded its wall-clock budget."""
