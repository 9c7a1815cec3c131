"""Evaluation errors."""


class EvaluationError(Exception):
    """Base class for scoring failures."""

    pass


class PartitionLengthError(EvaluationError, ValueError):
    """Raised when partitions (or a partition and its ignore mask) differ in length."""

    pass


class TruthSetError(EvaluationError, ValueError):
    """Raised when an example's set of true classes is empty, too large or out of range."""

    pass
