"""Exception hierarchy shared by the map, model and flow layers."""


class PolycycleError(Exception):
    """Base class for all package errors."""


class DomainError(PolycycleError, ValueError):
    """An argument lies outside the domain of a map or formula."""


class OrbitOverflowError(PolycycleError, ArithmeticError):
    """An iterate left the modeled annulus (exceeded the section half-width)."""


class TurnCapError(PolycycleError, RuntimeError):
    """Turn counting exceeded its configured cap."""


class PrecisionError(PolycycleError, ArithmeticError):
    """Working precision is too coarse for the requested tolerance."""


class ExistenceError(PolycycleError, ValueError):
    """The requested connection cannot exist for this model."""


class NonPositiveSplitting(PolycycleError, ValueError):
    """Turn count requested for eps <= 0.

    ``regime`` is ``"loop"`` when eps == 0 (the loop survives) and ``"cycle"``
    when eps < 0 (an attracting cycle separates the winding orbit from the loop).
    """

    def __init__(self, eps, regime):
        super().__init__(f"turn count undefined for eps={eps} ({regime} regime)")
        self.eps = eps
        self.regime = regime


class DegenerateFitError(PolycycleError, ValueError):
    """Not enough spread in the data for a least-squares fit."""


class IntegrationError(PolycycleError, RuntimeError):
    """The ODE integrator failed (e.g. step size underflow)."""


class BoundingBoxExit(IntegrationError):
    """A trajectory left the configured bounding box."""


class MissingCrossingError(PolycycleError, RuntimeError):
    """A separatrix never reached the requested section."""


class ConvergenceError(PolycycleError, RuntimeError):
    """An iterative solver did not converge."""


class NotASaddleError(PolycycleError, ValueError):
    """The located equilibrium is not a hyperbolic saddle."""


class GeometryError(PolycycleError, ValueError):
    """Infeasible geometry for the glued field construction."""
