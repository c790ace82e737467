"""Exception types raised by the solvers."""


class DomainError(ValueError):
    """Argument outside the set where an operation is defined."""


class ConvergenceError(RuntimeError):
    """An iterative solve did not reach its tolerance.

    ``history`` holds the residual norms of the iterations performed.
    """

    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class AdmissibilityError(RuntimeError):
    """The interface left the admissible neighbourhood of the flat state."""

    def __init__(self, message, t=None, sup_norm=None):
        super().__init__(message)
        self.t = t
        self.sup_norm = sup_norm
