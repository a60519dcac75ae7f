"""Exception types raised across the package."""


class LatticeFDError(Exception):
    """Base class for every error raised by latticefd."""


class InvalidSpec(LatticeFDError, ValueError):
    pass


class DegenerateBasis(LatticeFDError, ValueError):
    pass


class UnboundedRegion(LatticeFDError, ValueError):
    pass


class UnsupportedDimension(LatticeFDError, ValueError):
    pass


class NotApplicable(LatticeFDError):
    pass


class NotFlavored(LatticeFDError, ValueError):
    pass


class SingularMode(LatticeFDError):
    """A Fourier mode of the finite lattice sits on the dispersion surface."""

    def __init__(self, mode, value):
        self.mode = tuple(int(i) for i in mode)
        self.value = value
        super().__init__(f"|det| = {abs(value):.3e} at mode {self.mode}")


class OrderTwoUnsupported(LatticeFDError):
    pass


class ShapeMismatch(LatticeFDError, ValueError):
    pass


class BandwidthViolation(LatticeFDError, ValueError):
    pass


class BoundaryWrap(LatticeFDError, ValueError):
    pass


class DegenerateFit(LatticeFDError):
    """Residuals vanish at every spacing, so there is nothing to fit."""


class MassNotZero(LatticeFDError, ValueError):
    pass
