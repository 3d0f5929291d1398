"""Exception types shared across the library."""


class OklimError(Exception):
    """Base class for all library errors."""


class SingularPoint(OklimError):
    """Green's function evaluated at (or too close to) a lattice point."""


class CoincidentPoints(OklimError):
    """Two particles closer than the coincidence guard; the energy is +inf."""


class UnequalMasses2D(OklimError):
    """A 2D interaction energy was requested for unequal masses."""


class InadmissibleConfiguration(OklimError):
    """Configuration is not an admissible limit object for the requested quantity."""


class OverlappingBalls(OklimError):
    """Two balls of a finite-scale configuration overlap on the torus."""


class DiameterTooLarge(OklimError):
    """A ball diameter exceeds 1/2, breaking the min-image decomposition."""


class CutoffTooSmall(OklimError):
    """Certified truncation tail exceeds the accuracy contract."""


class NoRoot(OklimError):
    """A bracketing root search found no sign change."""


class NoConvergence(OklimError):
    """No optimizer restart reached the gradient tolerance.

    Carries the best-effort result in the ``result`` attribute.
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class IncommensurateCount(OklimError):
    """Particle count does not fit the requested lattice on the unit torus."""
