"""Exception taxonomy shared across the package."""


class PALabError(Exception):
    """Base class for all package errors."""


class FunctionDomainError(PALabError):
    """An attachment function was evaluated outside its domain (k >= 1)."""


class StructureError(PALabError):
    """A snapshot, log, or edge list violates its structural contract."""


class ConfigError(PALabError):
    """A growth or experiment configuration is invalid."""


class SamplerStateError(PALabError):
    """A sampler operation was attempted in an impossible state."""


class SamplerLogicError(PALabError):
    """A sampler update referenced an unknown or duplicate node."""


class NumericError(PALabError):
    """A numeric quantity became non-finite or underflowed."""


class DataError(PALabError):
    """Input data is too short or otherwise unusable for the requested statistic."""


class DivergenceError(PALabError):
    """The tail of the rho series cannot be certified at the requested rate."""


class HorizonError(PALabError):
    """Series summation exceeded the configured term budget."""


class NoMalthusianError(PALabError):
    """No root of rho(lambda) = 1 could be bracketed."""


class NormalizationError(PALabError):
    """Degree-one normalization was requested but r_hat(1) is unusable."""


class FormatError(PALabError):
    """A CSV input does not match the expected schema."""
