class DivergentIntegralError(ValueError):
    """A norm or density integral does not converge for the given datum."""


class RepresentationError(ValueError):
    """A result falls outside the supported RadialProfile term family."""


class AccuracyError(RuntimeError):
    """A requested evaluation exceeds the accuracy budget of a quadrature rule."""


class ConvergenceError(RuntimeError):
    """Adaptive refinement did not meet its tolerance."""


class UnsupportedInstanceError(ValueError):
    """No closed-form sharp constant is available for this (d, s)."""
