"""Exception hierarchy shared by all modules."""


class RankICAError(Exception):
    """Base class for every error raised by this package."""


class SingularMatrix(RankICAError, ValueError):
    pass


class AmbiguousOrdering(RankICAError, ValueError):
    """A tie in the column-dominance ordering of the canonical form."""


class DimensionMismatch(RankICAError, ValueError):
    pass


class InvalidParams(RankICAError, ValueError):
    pass


class DomainError(RankICAError, ValueError):
    pass


class DegenerateSample(RankICAError, ValueError):
    pass


class NonConvergence(RankICAError, RuntimeError):
    pass


class DivergentMoment(RankICAError, ArithmeticError):
    pass


class QuadratureFailure(RankICAError, ArithmeticError):
    pass


class RankDeficientData(RankICAError, ValueError):
    pass


class BudgetExceeded(RankICAError, MemoryError):
    pass


class DegenerateKurtoses(RankICAError, ValueError):
    """Two generalized kurtoses coincide, so the two-scatter estimator is not identified."""


class SingularUpdate(RankICAError, ArithmeticError):
    pass


class ConfigError(RankICAError, ValueError):
    pass


class ParseError(RankICAError, ValueError):
    pass


class TiesDetected(UserWarning):
    """Emitted when a residual column contains ties; they are broken by index order."""


class IoError(RankICAError, OSError):
    """Missing or unreadable input, or an unwritable output location."""
