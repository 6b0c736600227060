"""Exception types raised by the package."""


class DoslbError(Exception):
    """Base class for every error raised here."""


class NumericalError(DoslbError):
    """Numerical failures; the CLI maps these to exit code 2."""


class NotSymmetric(NumericalError):
    pass


class NotPositiveDefinite(NumericalError):
    pass


class DimensionMismatch(DoslbError, ValueError):
    pass


class NumericalFailure(NumericalError):
    """Simplex iteration cap reached without convergence."""


class InstanceError(DoslbError, ValueError):
    pass


class InvalidEps(InstanceError):
    pass


class OutOfRange(InstanceError):
    pass


class UnboundedDomain(InstanceError):
    pass


class BernoulliMeanOutOfRange(DoslbError, ValueError):
    pass


class NotOnSimplex(DoslbError, ValueError):
    pass


class TooManyVertices(DoslbError, ValueError):
    pass


class PermissibleEmpty(NumericalError):
    pass


class NoSafeFallback(NumericalError):
    pass


class EnumerationBudgetExceeded(DoslbError, ValueError):
    pass


class ProgramInfeasible(NumericalError):
    pass


class ProgramUnbounded(NumericalError):
    pass


class ExponentialBudgetExceeded(DoslbError, ValueError):
    pass


class NonpositiveGap(DoslbError, ValueError):
    pass


class ConfigError(DoslbError, ValueError):
    pass
