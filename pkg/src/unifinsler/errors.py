"""Exception hierarchy."""


class UnifinslerError(Exception):
    """Base class for all errors raised by this package."""


class MatrixFormatError(UnifinslerError, ValueError):
    pass


class DimensionMismatch(UnifinslerError, ValueError):
    pass


class NotUnitary(UnifinslerError, ValueError):
    pass


class NotSkewHermitian(UnifinslerError, ValueError):
    pass


class NotNormal(UnifinslerError, ValueError):
    pass


class NoConvergence(UnifinslerError, RuntimeError):
    pass


class InvalidP(UnifinslerError, ValueError):
    pass


class AntipodalSpectrum(UnifinslerError, ValueError):
    """Some eigenvalue of u^{-1} v sits on -1, so the short geodesic is not unique."""


class HypothesisViolation(UnifinslerError, ValueError):
    def __init__(self, message, offending=None):
        super().__init__(message)
        self.offending = list(offending or [])


class SpreadViolation(HypothesisViolation):
    pass


class LengthParameterExceeded(UnifinslerError, ValueError):
    pass


class RadiusViolation(UnifinslerError, ValueError):
    pass


class InfeasibleStart(UnifinslerError, ValueError):
    pass


class NotInSubspace(UnifinslerError, ValueError):
    pass


class RadiusTooLarge(UnifinslerError):
    """The measured circumradius bound does not fit under the admissible cap.

    ``bound`` is the best upper bound found and ``cap`` the threshold it had
    to beat. A heuristic witness only ever upper-bounds the true radius, so
    this error never claims the true radius is too large.
    """

    def __init__(self, bound: float, cap: float, witness=None):
        super().__init__(
            f"circumradius bound {bound:.12g} is not below the admissible cap {cap:.12g}")
        self.bound = bound
        self.cap = cap
        self.witness = witness


class NotHomomorphism(UnifinslerError, ValueError):
    pass


class NotProjection(UnifinslerError, RuntimeError):
    pass


class ConfigError(UnifinslerError, ValueError):
    pass


__all__ = [name for name, obj in list(globals().items())
           if isinstance(obj, type) and issubclass(obj, Exception) and obj.__module__ == __name__]
