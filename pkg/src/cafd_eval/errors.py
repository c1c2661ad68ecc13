"""Exception hierarchy shared by all cafd_eval modules.

The CLI maps these onto exit codes: any :class:`EvaluationError` is a
validation/data failure (exit 1) except :class:`NumericalError`, which
signals a numerical breakdown (exit 2).
"""


class EvaluationError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(EvaluationError):
    """File does not conform to the expected on-disk format."""


class TruncationError(FormatError):
    """Declared shape and actual payload size disagree."""


class DataError(EvaluationError):
    """Values are malformed: NaN/Inf, simplex violations, bad labels."""


class DimensionError(EvaluationError):
    """Paired inputs have incompatible shapes or class counts."""


class NumericalError(EvaluationError):
    """Numerical failure: non-PSD matrix, eigensolver non-convergence."""
