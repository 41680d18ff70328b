"""Exception types shared across the package."""


class ParameterError(ValueError):
    """Invalid input parameters (bad rectangle, t outside [0, 1], ...)."""


class DegenerateError(ArithmeticError):
    """A formula is evaluated exactly at a removable or genuine singularity."""


class SolverError(RuntimeError):
    """A dense decomposition failed."""

    def __init__(self, message, dim=None, cond=None):
        super().__init__(message)
        self.dim = dim
        self.cond = cond


class AssemblyError(RuntimeError):
    """An assembled FEM matrix failed its self-check."""


class ReportError(RuntimeError):
    """Not enough usable data to build a report (e.g. a slope fit)."""
