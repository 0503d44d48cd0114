"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the domain an operation is defined on."""


class ConstraintError(ValueError):
    """A design constraint (e.g. a mechanical lower bound) is violated."""


class SafetyError(ValueError):
    """A drive current would exceed the hard current cap."""


class EstimationError(ValueError):
    """Noise statistics could not be estimated from the data."""


class NoFeasibleDesign(Exception):
    """No pathway satisfies the power requirement."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance.

    The best estimate and its error bound are kept so callers can decide
    whether the result is still usable.
    """

    def __init__(self, message, estimate, error_bound):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound
