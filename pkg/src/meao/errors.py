"""Exception types shared across the package."""

__all__ = ["ValidationError", "SolverError", "ScanPointError"]


class ValidationError(ValueError):
    """Malformed or inconsistent input data (files, tables, states)."""


class SolverError(RuntimeError):
    """An iterative solver failed to reach its convergence target."""


class ScanPointError(RuntimeError):
    """A parameter-scan point failed; carries the offending parameter value."""

    def __init__(self, param, message):
        super().__init__(f"scan point {param!r}: {message}")
        self.param = param
