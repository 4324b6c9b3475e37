"""Exception hierarchy.

Each family maps onto one CLI exit code: configuration problems exit 2,
bad input data exits 3, numerical failures exit 4.
"""


class SynpaError(Exception):
    exit_code = 1


class ConfigError(SynpaError):
    exit_code = 2


class DataError(SynpaError):
    exit_code = 3


class InvalidSampleError(DataError, ValueError):
    """A counter sample cannot be turned into a stack."""


class TraceError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class SchemaError(DataError):
    """A model, workload or results file does not match its schema."""


class WorkloadError(DataError):
    """The application pool cannot satisfy a workload composition rule."""


class MetricsError(DataError):
    pass


class NumericalError(SynpaError):
    exit_code = 4


class FitError(NumericalError):
    def __init__(self, message, category=None):
        self.category = category
        super().__init__(message)


class MatchingError(SynpaError, ValueError):
    pass


class SimulationError(NumericalError):
    """The simulation loop hit its quantum cap without finishing."""
