"""Exception hierarchy shared by all hpaxis modules.

Two broad families matter for the CLI exit codes: input problems
(:class:`ConfigError`, :class:`AdmissibilityError`) and numerical failures
(:class:`NumericalError` and its subclasses).
"""


class HpaxisError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(HpaxisError):
    """A model definition file or inline definition failed to parse/validate."""


class AdmissibilityError(HpaxisError):
    """A feedback nonlinearity violated positivity or monotonicity."""


class NumericalError(HpaxisError):
    """Base class for failures of the numerical machinery."""


class BracketError(NumericalError):
    """Root bracketing failed (expansion cap or iteration cap exceeded)."""


class StepSizeUnderflow(NumericalError):
    """The adaptive integrator's step size collapsed below the usable minimum."""


class TrajectoryTooShort(NumericalError):
    """A trajectory tail is too short for the requested analysis."""


class PeakDetectionError(NumericalError):
    """Too few oscillation peaks were found to estimate a period."""
