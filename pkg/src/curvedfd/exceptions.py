"""Exception hierarchy for the solver."""


class CurvedFDError(Exception):
    """Base class for all errors raised by curvedfd."""


class UnsupportedOrder(CurvedFDError, ValueError):
    pass


class NewtonDivergence(CurvedFDError):
    pass


class NudgeFailed(CurvedFDError):
    pass


class MeshTooCoarse(CurvedFDError):
    pass


class NonPositiveDiffusion(CurvedFDError, ValueError):
    pass


class ZeroTangent(CurvedFDError, ValueError):
    pass


class StencilError(CurvedFDError):
    """Wraps a stencil construction failure with the offending grid node."""

    def __init__(self, message, index=None, point=None):
        super().__init__(message)
        self.index = index
        self.point = point


class ConditioningFloor(StencilError):
    pass


class StencilSingular(StencilError):
    pass


class NormalizationDegenerate(StencilError):
    pass


class SolveFailed(CurvedFDError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class DimensionMismatch(CurvedFDError, ValueError):
    pass


class ZeroNormExact(CurvedFDError, ValueError):
    pass
