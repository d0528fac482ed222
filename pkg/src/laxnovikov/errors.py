"""Exception hierarchy shared by all laxnovikov modules."""


class LaxNovikovError(Exception):
    """Base class for every error raised by this package."""


class NumericalFailure(LaxNovikovError):
    """A numerical obstruction (pole, collision, underflow) rather than bad input."""


class NotExactDerivative(LaxNovikovError):
    pass


class MissingDerivative(LaxNovikovError):
    pass


class NotMonic(LaxNovikovError):
    pass


class OrderNotDivisible(LaxNovikovError):
    pass


class InsufficientTruncation(LaxNovikovError):
    pass


class PreconditionViolated(LaxNovikovError):
    pass


class ConsistencyError(LaxNovikovError):
    """Two independent computations of the same quantity disagree."""


class PoleAt(NumericalFailure):
    def __init__(self, x, message=None):
        self.x = x
        super().__init__(message or f"pole of the profile at x={x}")


class RootCollision(NumericalFailure):
    def __init__(self, x, message=None):
        self.x = x
        super().__init__(message or f"pencil roots collide near x={x}")


# the integrator and the pencil tracker report the same event
Collision = RootCollision


class BranchViolation(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class PoleInM(NumericalFailure):
    pass


class NoSignChange(NumericalFailure):
    pass
