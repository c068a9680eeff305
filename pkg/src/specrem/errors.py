"""Exception types. The CLI maps each family onto a process exit code."""


class UsageError(ValueError):
    """Bad arguments: wrong color space, even window, missing model."""


class DataError(Exception):
    """Input data is unreadable or inconsistent (sizes, missing GT)."""


class TrainingError(Exception):
    """SVM training cannot proceed, e.g. only one class present."""


class ConvergenceError(TrainingError):
    def __init__(self, message, violation):
        super().__init__(message)
        self.violation = violation
