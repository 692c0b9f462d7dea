"""Exception types shared across the package."""


class ToricFactError(Exception):
    """Base class for all package errors."""


class NonIntegrable(ToricFactError):
    """A monomial has an exponent <= -1 and is not integrable on the quadrant."""


class OrderOverflow(ToricFactError):
    """A differential-operator computation would exceed the order cap."""


class MismatchedDeformation(ToricFactError):
    """Two noncommutative-torus elements carry different deformation matrices."""


class IndexOutOfRange(ToricFactError):
    pass


class ModeOverflow(ToricFactError):
    """Raised when an operator pushes a section outside the truncated mode set.

    The offending (output) modes are kept on ``clipped``.
    """

    def __init__(self, clipped):
        self.clipped = sorted(set(tuple(k) for k in clipped))
        super().__init__(f"modes outside the truncation: {self.clipped}")


class ZeroSpectralParameter(ToricFactError):
    pass


class EmptySupport(ToricFactError):
    pass


class UnsupportedSpec(ToricFactError):
    pass


class SingularCoefficient(ToricFactError):
    """A coefficient is not finite at some grid node."""
