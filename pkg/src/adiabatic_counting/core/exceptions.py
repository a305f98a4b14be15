"""
Error hierarchy for the counting simulator.

Everything derives from ValueError so callers that already guard on
invalid input keep working.
"""


class CountingError(ValueError):
    """Base class for every error raised by the package."""


class GuardViolation(CountingError):
    """A parameter or cost guard was violated (CLI exit status 2)."""


# database
class NonPowerOfTwoDomain(GuardViolation):
    pass


class IndexOutOfRange(GuardViolation):
    pass


class AlphaTooLarge(GuardViolation):
    pass


class LengthMismatch(CountingError):
    pass


class DegenerateSubspace(CountingError):
    pass


class InstanceFormatError(CountingError):
    """Instance or config file could not be parsed (CLI exit status 1)."""


# hamiltonian / closed form
class AlphaOutOfRange(GuardViolation):
    pass


class ParameterOutOfRange(GuardViolation):
    pass


# integrator
class StepTooLarge(GuardViolation):
    pass


class CostGuardExceeded(GuardViolation):
    pass


class DimensionTooLarge(GuardViolation):
    pass


class TooFewSteps(GuardViolation):
    pass


# estimator
class NonPhysicalOverlap(CountingError):
    pass


class DegenerateSamples(CountingError):
    pass


class AmbiguousBit(CountingError):
    pass


# scheduler
class GuardExceeded(GuardViolation):
    pass


class PlanBudgetViolation(GuardViolation):
    """The planned sweep rates cannot keep the phase budget below 2*pi/32."""
