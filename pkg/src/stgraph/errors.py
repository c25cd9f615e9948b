"""Exception types shared across the package."""


class StgraphError(Exception):
    pass


class NotHermitianError(StgraphError, ValueError):
    """Matrix is not a valid Minkowski carrier."""


class NotUnimodularError(StgraphError, ValueError):
    pass


class NotQuaternionError(StgraphError, ValueError):
    pass


class SingularMatrixError(StgraphError, ZeroDivisionError):
    """Raised for singular edges, coincident nodes, light-like differences."""


class DomainError(StgraphError, ValueError):
    """Parameters outside the supported domain."""


class NoBoundStateError(DomainError):
    pass


class ConvergenceError(StgraphError, RuntimeError):
    def __init__(self, msg, best_residual=float("nan"), iterations=0):
        super().__init__(f"{msg} (best residual {best_residual:.3e} after {iterations} iterations)")
        self.best_residual = best_residual
        self.iterations = iterations


class DivergingOptimumError(ConvergenceError):
    """The optimum runs off to infinity (no bound minimum)."""


class TimeArrowError(StgraphError, ValueError):
    """A step went backwards in time or is not time-like."""


class GridInvalidError(StgraphError, ValueError):
    pass
