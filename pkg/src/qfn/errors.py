"""Exception types shared across the package."""


class QfnError(Exception):
    """Base class for package errors."""


class InvalidAssignmentError(QfnError):
    """An assignment is out of range for a variable's alphabet."""


class InstanceTooLargeError(QfnError):
    """Exhaustive enumeration would exceed the configured cap."""


class WidthOverflowError(QfnError):
    """A register layout exceeds the state-vector engine qubit cap."""


class DecompositionInfeasibleError(QfnError):
    """Qubit budgets cannot be met even after full decomposition."""


class ConfigError(QfnError):
    """A run specification failed validation."""


class PrecisionOverflowError(QfnError):
    """A phase-estimation register would exceed t_max."""
