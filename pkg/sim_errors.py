# sim_errors.py

"""Exception types raised by the simulation modules and mapped to exit codes by cli."""


class RelaySimError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigError(RelaySimError, ValueError):
    """An input violates a documented precondition (geometry, frame, config, DMT range)."""


class NumericalError(RelaySimError, ArithmeticError):
    """A log-det, factorization or threshold came out non-finite or undefined."""

    def __init__(self, message: str, eta: float | None = None):
        super().__init__(message)
        self.eta = eta

    def __reduce__(self):
        # Keeps the extra attributes when the error crosses a process boundary
        return (self.__class__, (self.args[0], self.eta))


class TrialError(NumericalError):
    """A numerical failure inside one Monte Carlo trial, tagged with where it happened."""

    def __init__(self, message: str, trial_index: int, snr_db: float | None = None):
        super().__init__(message)
        self.trial_index = trial_index
        self.snr_db = snr_db

    def __reduce__(self):
        return (self.__class__, (self.args[0], self.trial_index, self.snr_db))

    def __str__(self) -> str:
        where = f"trial {self.trial_index}"
        if self.snr_db is not None:
            where += f", SNR {self.snr_db:g} dB"
        return f"{where}: {self.args[0]}"
