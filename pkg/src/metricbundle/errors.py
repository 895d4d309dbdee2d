"""Exception hierarchy shared by all metricbundle modules."""

from __future__ import annotations


class MetricBundleError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(MetricBundleError):
    pass


class NotHermitianError(MetricBundleError):
    pass


class NotPositiveDefiniteError(MetricBundleError):
    pass


class SingularMatrixError(MetricBundleError):
    pass


class EigenConvergenceError(MetricBundleError):
    pass


class ProfileSyntaxError(MetricBundleError):
    """Parse failure in a time-profile expression; carries the byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class UnknownFunctionError(ProfileSyntaxError):
    pass


class UnknownVariableError(ProfileSyntaxError):
    pass


class EvalError(MetricBundleError):
    """Numeric failure while evaluating a profile expression."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SchemaError(MetricBundleError):
    """Scenario file violates the schema; carries a JSON pointer."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer


class NoPositiveDefiniteSolutionError(MetricBundleError):
    """The stationarity equation has no positive-definite metric solution."""

    def __init__(self, message: str, degenerate: bool = False):
        super().__init__(message)
        self.degenerate = degenerate


class NonFiniteError(MetricBundleError):
    """An integration channel left the finite range (blow-up)."""

    def __init__(self, message: str, node_index: int, channel: str):
        super().__init__(f"{message} (node {node_index}, channel {channel})")
        self.node_index = node_index
        self.channel = channel


class StepLimitExceededError(MetricBundleError):
    pass


class TagMismatchError(MetricBundleError):
    """A bilinear form or transport mixed representation tags."""
