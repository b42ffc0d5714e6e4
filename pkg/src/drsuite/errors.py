"""Shared exception types for the drsuite package."""


class DrSuiteError(Exception):
    """Base class for all drsuite errors."""

    code = "error"

    def to_json(self):
        return {"code": self.code, "message": str(self)}


class InvalidArgument(DrSuiteError):
    code = "invalid_argument"


class SchemaMismatch(DrSuiteError):
    code = "schema_mismatch"


class IrregularInterval(DrSuiteError):
    code = "irregular_interval"


class EmptyData(DrSuiteError):
    code = "empty_data"


class InsufficientHistory(DrSuiteError):
    code = "insufficient_history"


class UndefinedMetric(DrSuiteError):
    code = "undefined_metric"


class DegenerateControl(UserWarning):
    """A control column is constant over the training data; its
    coefficient is pinned to zero and flagged."""


class InfeasibleComfort(DrSuiteError):
    """Hard comfort bounds cannot be met; carries the soft-penalty
    fallback solution so the caller can still act on something."""

    code = "infeasible_comfort"

    def __init__(self, message, fallback=None):
        super().__init__(message)
        self.fallback = fallback
