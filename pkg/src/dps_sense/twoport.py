"""Two-port network algebra: chain (ABCD) matrices and scattering parameters.

Sign and phase conventions used throughout the package:

* time dependence is e^{+j omega t}, so an ideal delay line has a negative
  unwrapped phase slope and passive loss means Im(eps) <= 0;
* reference impedances are real (a standard 50 ohm instrument port).

All operations are pure functions; chain matrices and scattering parameter
bundles are immutable once built, so frequency grids can be evaluated
concurrently without coordination.  Every field accepts either a complex
scalar or a numpy array of complex values (one entry per frequency), and the
algebra broadcasts elementwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constants import DET_RTOL, SINGULARITY_FLOOR, Z0_DEFAULT
from .errors import InvalidInputError, SingularNetworkError

__all__ = [
    "TwoPort",
    "SParams",
    "abcd_series",
    "abcd_shunt",
    "cascade",
    "abcd_to_s",
    "s_to_abcd",
    "unwrap_phase",
    "validate_frequency_grid",
]


def _require_finite(name: str, value) -> None:
    v = np.asarray(value)
    if not np.all(np.isfinite(v.real)) or not np.all(np.isfinite(v.imag)):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True, eq=False)
class TwoPort:
    """Chain (ABCD) matrix [[a, b], [c, d]]; b in ohms, c in siemens."""

    a: complex | np.ndarray
    b: complex | np.ndarray
    c: complex | np.ndarray
    d: complex | np.ndarray

    @classmethod
    def identity(cls) -> "TwoPort":
        return cls(1.0 + 0j, 0j, 0j, 1.0 + 0j)

    @property
    def determinant(self) -> complex | np.ndarray:
        return self.a * self.d - self.b * self.c

    def is_reciprocal(self, rtol: float = DET_RTOL) -> bool:
        """True when a*d - b*c == 1 within rtol (holds for any cascade of
        series/shunt primitives)."""
        return bool(np.all(np.abs(self.determinant - 1.0) <= rtol))


@dataclass(frozen=True, eq=False)
class SParams:
    """Scattering parameters referenced to a real port impedance."""

    s11: complex | np.ndarray
    s21: complex | np.ndarray
    s12: complex | np.ndarray
    s22: complex | np.ndarray
    reference_impedance: float = Z0_DEFAULT

    def __post_init__(self):
        if not (self.reference_impedance > 0):
            raise InvalidInputError(
                f"reference impedance must be > 0, got {self.reference_impedance}"
            )


def abcd_series(z: complex) -> TwoPort:
    """Chain matrix [[1, z], [0, 1]] of a series impedance z (ohms)."""
    _require_finite("series impedance", z)
    zero = np.zeros_like(np.asarray(z)) if isinstance(z, np.ndarray) else 0j
    one = zero + 1.0
    return TwoPort(one, z + zero, zero, one)


def abcd_shunt(y: complex) -> TwoPort:
    """Chain matrix [[1, 0], [y, 1]] of a shunt admittance y (siemens)."""
    _require_finite("shunt admittance", y)
    zero = np.zeros_like(np.asarray(y)) if isinstance(y, np.ndarray) else 0j
    one = zero + 1.0
    return TwoPort(one, zero, y + zero, one)


def cascade(first: TwoPort, second: TwoPort, *rest: TwoPort) -> TwoPort:
    """Matrix product of two-ports in signal-flow order (port 1 to port 2).

    Associative; cascading with the identity is a no-op.
    """
    nets = (first, second) + rest
    a, b, c, d = first.a, first.b, first.c, first.d
    for net in nets[1:]:
        a, b, c, d = (
            a * net.a + b * net.c,
            a * net.b + b * net.d,
            c * net.a + d * net.c,
            c * net.b + d * net.d,
        )
    return TwoPort(a, b, c, d)


def abcd_to_s(net: TwoPort, z0: float = Z0_DEFAULT) -> SParams:
    """Convert a chain matrix to scattering parameters (real z0).

    s21 = 2 / (a + b/z0 + c*z0 + d); a vanishing denominator means the
    network is singular at that evaluation point.
    """
    if not (z0 > 0):
        raise InvalidInputError(f"z0 must be > 0, got {z0}")
    a, b, c, d = net.a, net.b, net.c, net.d
    den = a + b / z0 + c * z0 + d
    bad = np.abs(den) < SINGULARITY_FLOOR
    if np.any(bad):
        idx = np.flatnonzero(np.atleast_1d(bad))
        raise SingularNetworkError(
            f"ABCD->S denominator below {SINGULARITY_FLOOR} at {idx.size} point(s)"
        )
    det = net.determinant
    return SParams(
        s11=(a + b / z0 - c * z0 - d) / den,
        s21=2.0 / den,
        s12=2.0 * det / den,
        s22=(-a + b / z0 - c * z0 + d) / den,
        reference_impedance=z0,
    )


def s_to_abcd(sp: SParams) -> TwoPort:
    """Inverse of abcd_to_s (requires s21 != 0)."""
    z0 = sp.reference_impedance
    s11, s21, s12, s22 = sp.s11, sp.s21, sp.s12, sp.s22
    if np.any(np.abs(s21) < SINGULARITY_FLOOR):
        raise SingularNetworkError("cannot invert scattering data with s21 == 0")
    two_s21 = 2.0 * s21
    return TwoPort(
        a=((1 + s11) * (1 - s22) + s12 * s21) / two_s21,
        b=z0 * ((1 + s11) * (1 + s22) - s12 * s21) / two_s21,
        c=((1 - s11) * (1 - s22) - s12 * s21) / (z0 * two_s21),
        d=((1 - s11) * (1 + s22) + s12 * s21) / two_s21,
    )


def unwrap_phase(phases_rad) -> np.ndarray:
    """Remove 2*pi branch jumps from an ordered phase sequence (radians).

    Adjacent output samples differ by less than pi and each output value is
    congruent to its input modulo 2*pi.
    """
    p = np.asarray(phases_rad, dtype=float)
    if p.size == 0:
        raise InvalidInputError("phase sequence must be non-empty")
    return np.unwrap(p)


def validate_frequency_grid(points) -> np.ndarray:
    """Return the grid as a float array; must be strictly increasing and > 0."""
    f = np.asarray(points, dtype=float)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInputError("frequency grid must be a non-empty 1-D sequence")
    if not np.all(f > 0):
        raise InvalidInputError("frequency grid must be strictly positive")
    if f.size > 1 and not np.all(np.diff(f) > 0):
        raise InvalidInputError("frequency grid must be strictly increasing")
    return f
