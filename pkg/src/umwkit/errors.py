"""Exception types shared across the package."""


class UmwError(Exception):
    """Base class for all umwkit errors."""


class DomainError(UmwError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceFailure(UmwError, RuntimeError):
    """An iterative procedure exhausted its iteration budget."""


class SingularInformation(UmwError, RuntimeError):
    """The observed information matrix could not be inverted; standard
    errors are unavailable for the requested operation."""


class RankDeficientDesign(UmwError, ValueError):
    """The regression design matrix does not have full column rank."""


class DegenerateProbability(UmwError, ValueError):
    """A fitted CDF value collapsed to exactly 0 or 1, so probability-scale
    transforms (quantile residuals, EDF statistics) are undefined."""
