class SolverError(RuntimeError):
    """A root solve failed; ``index`` locates the failing entry when known."""

    def __init__(self, message, index=None, value=None):
        self.reason = message
        if index is not None:
            message = f"{message} (index {index})"
        super().__init__(message)
        self.index = index
        self.value = value


class ConvergenceError(RuntimeError):
    """An iteration stopped before reaching its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SubCellWarning(UserWarning):
    """A requested interval is narrower than the partition cell holding it."""
