"""Exception types raised by the toolkit.

Everything derives from DpsSenseError so callers (and the CLI) can separate
model-domain failures from I/O and configuration problems.
"""


class DpsSenseError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(DpsSenseError, ValueError):
    """An argument violates a documented precondition (non-finite, sign, range)."""


class SingularNetworkError(DpsSenseError):
    """The ABCD->S conversion denominator vanished."""


class PoleProximityError(DpsSenseError):
    """Evaluation requested too close to the shunt-branch admittance pole."""


class GeometryInfeasibleError(DpsSenseError):
    """Physical dimensions produce a non-evaluable closed form."""


class FormulaDomainError(DpsSenseError):
    """A closed form was evaluated outside its domain (sign of a denominator)."""


class ClosedFormInapplicableError(DpsSenseError):
    """The closed-form band-edge radical has a negative discriminant."""


class StepSizeError(DpsSenseError):
    """A finite-difference derivative did not converge under step halving."""


class DegenerateCalibrationError(DpsSenseError):
    """A calibration slope is zero where an inverse is required."""


class ExtrapolationRefusedError(DpsSenseError):
    """Lookup outside the calibration curve; carries the nearest bound."""

    def __init__(self, message: str, nearest_bound: float):
        super().__init__(message)
        self.nearest_bound = nearest_bound


class RangeError(DpsSenseError):
    """Detector quantity outside the instrument's specified range."""


class NoFitError(DpsSenseError):
    """Inversion residual stayed above the plausibility threshold."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class FitInfeasibleError(DpsSenseError):
    """Relaxation-model fit anchor outside the representable range."""


class SamplingError(DpsSenseError):
    """Waveform sample rate too low for the requested edge speed."""


class AliasingError(DpsSenseError):
    """Propagation output wrapped into the padding guard region."""


class ConfigError(DpsSenseError):
    """Configuration file missing, unreadable, or malformed."""
