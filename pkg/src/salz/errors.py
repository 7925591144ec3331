"""Exception hierarchy.

``SalzError`` is the common base.  ``ConfigError`` marks bad user input
(CLI exit code 2); ``NumericalError`` marks failures of the numerics at
runtime (CLI exit code 3).
"""


class SalzError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SalzError):
    """Invalid configuration value; message names the offending key."""


class NumericalError(SalzError):
    """A numerical guarantee could not be met during a computation."""


class NotHermitian(SalzError):
    """Input matrix violates the Hermitian symmetry tolerance."""


class DegenerateSpectrum(NumericalError):
    """Instantaneous spectrum too close to degenerate for a stable
    counterdiabatic construction."""


class DegenerateSeparation(SalzError):
    """Crossing separation is zero where a finite separation is required."""


class WrongRegime(SalzError):
    """An analytic special-case formula was called outside its regime."""


class SingularPoint(SalzError):
    """Perturbative expression evaluated exactly at one of its poles."""


class StepTooLarge(NumericalError):
    """Integrator step violates the stability bound step * max||H|| <= 0.1."""


class NormDrift(NumericalError):
    """State norm drifted beyond tolerance during propagation."""


class NonPositiveData(SalzError):
    """Power-law fit received non-positive data inside the fit window."""


class TooFewPoints(SalzError):
    """Power-law fit window contains fewer points than required."""


class EmptyWindow(SalzError):
    """Requested averaging window contains no samples."""
