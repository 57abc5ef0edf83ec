"""Exception hierarchy.

Every failure raised by the library derives from :class:`JoyceKitError` so that
callers (in particular the command line runner) can map them to structured
error records with a single ``except`` clause.
"""

from __future__ import annotations


class JoyceKitError(Exception):
    """Base class for all library errors."""


class ConfigError(JoyceKitError):
    """Invalid runner configuration."""


class CheckFailure(JoyceKitError):
    """A residual check exceeded its tolerance."""


# chart / model evaluation
class PoleError(JoyceKitError, ValueError):
    """Evaluation requested on (or too close to) the polar divisor of a model."""


class ZeroEpsilon(JoyceKitError, ValueError):
    """The pencil parameter epsilon was zero where a nonzero value is required."""


class BothZero(JoyceKitError, ValueError):
    """Both homogeneous pencil coordinates vanish."""


class NoPeriodStructure(JoyceKitError):
    """Operation needs a period structure (integral linear coordinates)."""


class StepUnderflow(JoyceKitError):
    """Finite-difference step had to shrink below the admissible minimum."""


class SingularMetric(JoyceKitError):
    """The metric is numerically degenerate."""


# elliptic curves
class DegenerateCurve(JoyceKitError, ValueError):
    """The cubic has a repeated root (4a^3 + 27b^2 = 0)."""


class QuadratureFailure(JoyceKitError):
    """Adaptive quadrature did not reach the requested tolerance."""


class OffCurve(JoyceKitError, ValueError):
    """A point (q, p) does not satisfy p^2 = q^3 + a q + b."""


class PathThroughBranchPoint(JoyceKitError, ValueError):
    """An integration path starts at or passes through a branch point."""


# worked examples
class ZeroZ(JoyceKitError, ValueError):
    """The A1 base coordinate z vanished."""


class PoleAtPZero(PoleError):
    """The A2 state has p = 0."""


class DegenerateBase(JoyceKitError, ValueError):
    """The A2 base point lies on the discriminant."""


class PoleOnZeroSection(PoleError):
    """The zero section theta = 0 lies in the polar locus."""


# integration
class PoleEncountered(JoyceKitError):
    """An integration path ran into the pole guard.

    Attributes
    ----------
    partial : object
        The path computed up to the last accepted step.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class TolFailure(JoyceKitError):
    """The adaptive integrator could not meet its tolerance."""


class DegenerateFrame(JoyceKitError):
    """A frame matrix is rank deficient."""


# hamiltonian systems
class DomainExit(JoyceKitError):
    """A flow left the declared domain of a Hamiltonian system."""


class TransversalityFailure(JoyceKitError):
    """The transversality condition for Hamiltonian extraction fails."""


class NotOnY(JoyceKitError, ValueError):
    """The seed point does not lie on the chosen level set."""


class LoopThroughSingularity(JoyceKitError, ValueError):
    """A monodromy loop comes too close to a singular or turning point."""
