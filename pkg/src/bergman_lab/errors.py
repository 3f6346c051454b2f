"""Exception types shared across the package."""


class BergmanLabError(Exception):
    """Base class for all package errors."""


# geometry
class NonPositiveSpacing(BergmanLabError):
    pass


class EmptyRasterization(BergmanLabError):
    pass


class PointOutsideDomain(BergmanLabError):
    pass


class UnsupportedSpec(BergmanLabError):
    """Operation not defined for this domain variant."""


# potential solvers
class BallTooCloseToBoundary(BergmanLabError):
    pass


class PoleTooCloseToBoundary(BergmanLabError):
    pass


class NoConvergence(BergmanLabError):
    def __init__(self, max_iters, residual):
        self.max_iters = max_iters
        self.residual = residual
        super().__init__(f"no convergence after {max_iters} sweeps (last update {residual:.3e})")


class StencilOutsideDomain(BergmanLabError):
    pass


class EmptySublevel(BergmanLabError):
    """No grid cell below the requested level set; pole too close to the boundary for this grid."""


class UnsupportedFactor(BergmanLabError):
    pass


# bases / kernels
class GramNotPD(BergmanLabError):
    pass


class BasisLargerThanQuadrature(BergmanLabError):
    pass


class DivergentNorm(BergmanLabError):
    pass


class NoUsableCollars(BergmanLabError):
    pass


class DegenerateKernel(BergmanLabError):
    pass


class Disconnected(BergmanLabError):
    pass


# index estimation
class TooFewLevels(BergmanLabError):
    pass


class AllInconclusive(BergmanLabError):
    pass


class FixtureUnavailable(BergmanLabError):
    pass


# capacity
class DegenerateSet(BergmanLabError):
    pass


class InvalidRatios(BergmanLabError):
    pass


class DimOutOfRange(BergmanLabError):
    pass


# dynamics
class DidNotEscape(BergmanLabError):
    def __init__(self, point, iterations):
        self.point = point
        self.iterations = iterations
        super().__init__(f"{point} did not escape within {iterations} iterations")


class ZeroGradient(BergmanLabError):
    pass


class InsufficientEscapes(BergmanLabError):
    pass


# store
class CorruptEntry(BergmanLabError):
    pass


class IoFailure(BergmanLabError):
    pass
