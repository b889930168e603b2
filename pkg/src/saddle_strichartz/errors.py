"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class ParaboloidSignatureError(DomainError):
    """All signs of the quadratic form are equal; only hyperbolic forms are handled."""


class BranchCutError(DomainError):
    """A complex power was requested on the closed negative real axis."""


class DegenerateChangeError(DomainError):
    """The moment change of variables is constant at the critical exponent."""


class DivergenceError(DomainError):
    """The requested integral does not converge."""


class SingularityError(DomainError):
    """Evaluation on the singular set of a kernel."""


class ResolutionError(DomainError):
    """The sampling grid cannot resolve the requested oscillation (Nyquist)."""


class BudgetExceededError(RuntimeError):
    """Adaptive quadrature ran out of evaluations.

    The best available estimate is kept on ``best`` so callers can still
    report it.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best
