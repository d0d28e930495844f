"""Exception types raised by ncbeta."""


class NcBetaError(Exception):
    """Base class for all library errors."""


class InvalidParameter(NcBetaError, ValueError):
    """A parameter lies outside the domain of the requested operation."""


class DegenerateParameter(InvalidParameter):
    """The operation is undefined at this boundary (e.g. zero total non-centrality)."""


class OrderOutOfRange(InvalidParameter):
    """Moment order outside the supported range."""


class NonConvergence(NcBetaError, ArithmeticError):
    """A series did not meet its truncation criterion within ``max_terms``."""


class EmptySample(NcBetaError, ValueError):
    pass


class ZeroVariance(NcBetaError, ValueError):
    pass


class BenchmarkMismatch(NcBetaError):
    """The two timed formulas returned different moment values."""
