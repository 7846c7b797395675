"""Exception types shared across the package.

Each maps to a CLI exit code: ConfigError -> 2, SolverDivergenceError -> 3,
TrainingAbortError -> 4.
"""


class QmflowError(Exception):
    """Base class for package errors."""


class ConfigError(QmflowError):
    """Rejected configuration: invalid parameters or violated stability bounds."""


class SolverDivergenceError(QmflowError):
    """A solver produced non-finite values."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class TrainingAbortError(QmflowError):
    """Training hit a non-finite loss or gradient."""

    def __init__(self, message, epoch=None, param=None):
        super().__init__(message)
        self.epoch = epoch
        self.param = param


class OracleMismatchError(QmflowError):
    """Quantum-emulated step disagreed with its same-algebra classical reference."""
