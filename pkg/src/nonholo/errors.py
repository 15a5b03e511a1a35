"""Exception hierarchy shared by every module of the package."""


class NonholoError(Exception):
    """Base class for all library errors."""


class EvaluationFailure(NonholoError):
    """A user-supplied evaluator raised or returned non-finite values."""


class SingularMatrix(NonholoError):
    """A matrix that must be invertible failed factorization or is ill-conditioned."""


class DimensionMismatch(NonholoError, ValueError):
    pass


class RankDeficient(NonholoError):
    pass


class NotLinear(NonholoError, ValueError):
    pass


class InvalidParameter(NonholoError, ValueError):
    pass


class InitialStateError(NonholoError, ValueError):
    """The initial state is off the constraint manifold or irregular."""


class DriftExceeded(NonholoError):
    """Constraint residual exceeded the abort threshold during integration."""

    def __init__(self, message, time=None, residual=None):
        super().__init__(message)
        self.time = time
        self.residual = residual


class SingularStateEncountered(NonholoError):
    """The integrator reached a state where the constraint is not regular."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time
