"""Exception hierarchy.

Every error carries a short message; the CLI maps them onto exit codes.
"""


class SurfwaveError(Exception):
    """Base class for all package errors."""


class ConfigError(SurfwaveError):
    """Malformed or inconsistent configuration input."""


class NonPositiveParameter(ConfigError, ValueError):
    """A density or Lame parameter is not strictly positive."""


class OutsideWorkingBox(SurfwaveError, ValueError):
    """A spatial point lies outside the declared working box."""


class DegenerateMetric(SurfwaveError, ValueError):
    """The boundary metric is not uniformly positive definite."""


class OutsideEllipticRange(SurfwaveError, ValueError):
    """A slowness ratio lies outside the open interval (0, c_s)."""


class OutsideEllipticInterior(SurfwaveError, ValueError):
    """A phase-space point is not strictly inside the elliptic region."""


class NumericalFailure(SurfwaveError, ArithmeticError):
    """Base class for failures of a numerical procedure."""


class RootCountMismatch(NumericalFailure):
    """A sign scan found an unexpected number of roots."""


class DegenerateEigenvalue(NumericalFailure):
    """Two eigenvalues coincide so the eigenbasis is ill defined."""


class NoStoneleyRoot(NumericalFailure):
    """The interface secular function has no root for this pair."""


class OutsideTube(SurfwaveError, ValueError):
    """The point is too far from the characteristic variety."""


class LeftWorkingBox(NumericalFailure):
    """A ray left the working box during integration."""


class StepTooLarge(NumericalFailure):
    """Hamiltonian drift exceeded the tolerated bound."""


class CausticEncountered(NumericalFailure):
    """The ray Jacobian became singular.

    Attributes
    ----------
    partial : object
        Whatever was computed before the caustic, or None.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InterpolationGap(NumericalFailure):
    """A chart target is not covered by the traced fan."""


class OffCharacteristic(SurfwaveError, ValueError):
    """A point expected on the characteristic variety is not on it."""


class SourceNotExpired(SurfwaveError, ValueError):
    """Evaluation time precedes the end of the source support."""


class DegenerateEllipse(NumericalFailure):
    """A polarization ellipse has a vanishing semi-axis."""
