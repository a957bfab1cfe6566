"""Exception types shared across the solver stack."""


class NumericsError(Exception):
    """Base class for numerical failures (as opposed to bad arguments)."""


class ConvergenceError(NumericsError):
    """An iterative solver exhausted its budget.

    Attributes
    ----------
    residual : float or array
        Residual(s) at the point of failure.
    iterations : int
        Iterations actually performed.
    """

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class InfeasibleOccupationError(NumericsError):
    """The occupation sum cannot reach the requested electron count."""


class TruncationOverflowError(NumericsError):
    """The spectral window could not be closed with the available levels.

    Attributes
    ----------
    achieved_window : float
        Largest computed level offset from the Fermi level.
    required_window : float
        Offset that would have closed the truncation window.
    levels : int
        Number of eigenpairs computed when giving up.
    """

    def __init__(self, message, achieved_window, required_window, levels):
        super().__init__(message)
        self.achieved_window = achieved_window
        self.required_window = required_window
        self.levels = levels
