"""Equivalent-circuit model of the dispersive phase shifter (DPS).

The shifter is a loaded line whose periodic unit cell combines a series
branch (top-layer inductance L in series with the interdigital capacitance
C_i) and a shunt branch (plate capacitance C_t = C_u + C_d loaded by the
spiral-resonator tank L_c, C_c):

    Z(f) = j*w*L/2 + 1/(2j*w*C_i)
    Y(f) = j*w*C_t * (1 - w^2*L_c*C_c) / (1 - w^2*L_c*(C_c + C_t))

The cell is realized as a symmetric T (Z/2, Y, Z/2), the realization whose
image impedance matches

    Z_c = sqrt((Z/2) * (Z/2 + 2/Y))

and the Bloch phase per cell follows from cos(beta*l) = 1 + Z*Y/2.
A propagating (backward-wave) band exists where beta*l and Z_c are both
real; the shunt branch has a transmission zero at the pole of Y and the
series branch contributes a zero at DC.

Two band-edge computations are provided.  The closed-form variant evaluates
the published radical exactly as printed (its middle coefficient mixes
units, which is why it disagrees with everything else); the numeric variant
scans the dispersion relation and is the authoritative one.  Both are kept
and their disagreement is emitted as a report rather than reconciled.

Material loss enters only through C_u and C_i, which may carry a negative
imaginary part (e^{+j w t} convention); C_d, C_c, L, L_c stay real.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import (
    BAND_EDGE_RESOLUTION_HZ,
    POLE_RTOL,
    REPORTED_ZERO_TRANSFER_HZ,
    Z0_DEFAULT,
)
from .errors import ClosedFormInapplicableError, InvalidInputError, PoleProximityError
from .twoport import (
    SParams,
    TwoPort,
    abcd_series,
    abcd_shunt,
    abcd_to_s,
    cascade,
    unwrap_phase,
    validate_frequency_grid,
)

__all__ = [
    "CircuitValues",
    "DispersionPoint",
    "BandStructure",
    "Sweep",
    "REFERENCE_CIRCUIT",
    "series_impedance",
    "shunt_admittance",
    "series_zero_frequency",
    "admittance_zero_frequency",
    "admittance_pole_frequency",
    "dispersion",
    "band_edges_numeric",
    "band_edges_closed_form",
    "default_band_search_grid",
    "s_parameters",
    "dual_band_report",
]

_IMAG_TOL = 1e-30


@dataclass(frozen=True)
class CircuitValues:
    """Six lumped elements of the shifter cell.

    L, L_c in henries; C_i, C_u, C_d, C_c in farads.  C_i and C_u may be
    complex to carry material loss (imaginary part <= 0); the other four
    elements are strictly real.
    """

    L: float
    C_i: complex
    C_u: complex
    C_d: float
    C_c: float
    L_c: float

    def __post_init__(self):
        for name in ("L", "C_i", "C_u", "C_d", "C_c", "L_c"):
            v = complex(getattr(self, name))
            if not (math.isfinite(v.real) and math.isfinite(v.imag)):
                raise InvalidInputError(f"{name} must be finite, got {v}")
            if v.real <= 0:
                raise InvalidInputError(f"Re({name}) must be > 0, got {v}")
        for name in ("L", "L_c", "C_d", "C_c"):
            v = complex(getattr(self, name))
            if abs(v.imag) > _IMAG_TOL:
                raise InvalidInputError(f"{name} must be real, got {v}")
        for name in ("C_i", "C_u"):
            v = complex(getattr(self, name))
            if v.imag > _IMAG_TOL:
                raise InvalidInputError(
                    f"Im({name}) must be <= 0 (passive loss), got {v}"
                )

    @property
    def C_t(self) -> complex:
        """Total shunt plate capacitance C_u + C_d."""
        return self.C_u + self.C_d

    def lossless(self) -> "CircuitValues":
        """Copy with the loss stripped from C_i and C_u."""
        return replace(self, C_i=complex(self.C_i).real, C_u=complex(self.C_u).real)


# Vendor-style reference values for the unloaded sensor head (per cell).
REFERENCE_CIRCUIT = CircuitValues(
    L=1.5e-9,
    C_i=1.2e-12,
    C_u=14.1e-12,
    C_d=15.9e-12,
    C_c=7.8e-12,
    L_c=17.2e-9,
)

# Inductances are not affected by the material under test; extraction takes
# them as inputs with these defaults.
DEFAULT_INDUCTORS = {"L": REFERENCE_CIRCUIT.L, "L_c": REFERENCE_CIRCUIT.L_c}


def _check_frequency(f) -> np.ndarray | float:
    arr = np.asarray(f, dtype=float)
    if not np.all(arr > 0):
        raise InvalidInputError("frequency must be > 0")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("frequency must be finite")
    return arr if isinstance(f, np.ndarray) else float(f)


def series_impedance(c: CircuitValues, f) -> complex | np.ndarray:
    """Series-branch impedance Z(f) = j*w*L/2 + 1/(2j*w*C_i), ohms."""
    f = _check_frequency(f)
    w = 2.0 * np.pi * f
    return 1j * w * c.L / 2.0 + 1.0 / (2j * w * c.C_i)


def shunt_admittance(c: CircuitValues, f, *, guard_pole: bool = True) -> complex | np.ndarray:
    """Shunt-branch admittance Y(f), siemens.

    Y(f) = j*w*C_t*(1 - w^2*L_c*C_c) / (1 - w^2*L_c*(C_c + C_t)).
    Evaluation within POLE_RTOL (relative) of the real pole frequency is
    refused; sweeps mask such points instead.
    """
    f = _check_frequency(f)
    if guard_pole:
        f_pole = admittance_pole_frequency(c)
        if np.any(np.abs(np.asarray(f) - f_pole) <= POLE_RTOL * f_pole):
            raise PoleProximityError(
                f"requested frequency within {POLE_RTOL:g} (relative) of the "
                f"admittance pole at {f_pole:.6e} Hz"
            )
    w = 2.0 * np.pi * f
    w2 = w * w
    c_t = c.C_t
    num = 1j * w * c_t * (1.0 - w2 * c.L_c * c.C_c)
    den = 1.0 - w2 * c.L_c * (c.C_c + c_t)
    return num / den


def series_zero_frequency(c: CircuitValues) -> float:
    """Series-resonance frequency 1/(2*pi*sqrt(L*C_i)) where Z = 0, Hz."""
    return 1.0 / (2.0 * np.pi * math.sqrt(c.L * complex(c.C_i).real))


def admittance_zero_frequency(c: CircuitValues) -> float:
    """Frequency 1/(2*pi*sqrt(L_c*C_c)) where the shunt branch opens, Hz."""
    return 1.0 / (2.0 * np.pi * math.sqrt(c.L_c * c.C_c))


def admittance_pole_frequency(c: CircuitValues) -> float:
    """Shunt-branch pole 1/(2*pi*sqrt(L_c*(C_c + C_t))), Hz.

    This is the transmission zero sitting just below the passband (the DC
    zero of the series branch is the other one).  Computed from the real
    parts so it stays defined for lossy cells.
    """
    c_sum = c.C_c + complex(c.C_t).real
    return 1.0 / (2.0 * np.pi * math.sqrt(c.L_c * c_sum))


@dataclass(frozen=True)
class DispersionPoint:
    """Bloch solution of one cell at one frequency."""

    frequency: float
    beta_l: complex      # phase constant times cell length, radians
    z_c: complex         # image (characteristic) impedance, ohms
    propagating: bool


def _cos_beta_l(c: CircuitValues, f):
    return 1.0 + series_impedance(c, f) * shunt_admittance(c, f) / 2.0


def dispersion(c: CircuitValues, f: float) -> DispersionPoint:
    """Solve cos(beta*l) = 1 + Z*Y/2 and Z_c = sqrt((Z/2)(Z/2 + 2/Y)).

    Branches: beta*l takes Im <= 0 (decaying wave) and Z_c the principal
    square root (Re >= 0).  The point is flagged propagating when
    |Re(cos beta*l)| <= 1, the imaginary part is negligible, and Re(Z_c) > 0,
    which for a lossless cell is the backward-wave passband.
    """
    f = float(f)
    u = complex(_cos_beta_l(c, f))
    beta_l = cmath.acos(u)
    if beta_l.imag > 0:
        beta_l = -beta_l
    z = complex(series_impedance(c, f))
    y = complex(shunt_admittance(c, f))
    # + 0j normalizes a signed-zero imaginary part so the stopband branch
    # (negative real radicand) lands on the upper side of the sqrt cut
    z_c = cmath.sqrt((z / 2.0) * (z / 2.0 + 2.0 / y) + 0j)
    if z_c.real < 0:
        z_c = -z_c
    propagating = abs(u.real) <= 1.0 and abs(u.imag) < 1e-9 and z_c.real > 0.0
    return DispersionPoint(frequency=f, beta_l=beta_l, z_c=z_c, propagating=propagating)


def _propagating_mask(c: CircuitValues, f: np.ndarray) -> np.ndarray:
    """Vectorized propagating flag over a grid (pole points are stopband)."""
    f_pole = admittance_pole_frequency(c)
    safe = np.abs(f - f_pole) > POLE_RTOL * f_pole
    mask = np.zeros(f.shape, dtype=bool)
    if not np.any(safe):
        return mask
    fs = f[safe]
    u = _cos_beta_l(c, fs)
    z = series_impedance(c, fs)
    y = shunt_admittance(c, fs, guard_pole=False)
    zc2 = (z / 2.0) * (z / 2.0 + 2.0 / y)
    zc = np.sqrt(zc2.astype(complex) + 0j)
    zc = np.where(zc.real < 0, -zc, zc)
    mask[safe] = (np.abs(u.real) <= 1.0) & (np.abs(u.imag) < 1e-9) & (zc.real > 0.0)
    return mask


@dataclass(frozen=True)
class BandStructure:
    """Passband edges and transmission zeros of the cell.

    f_cl/f_cu bound the primary (lowest) propagating band; `bands` lists
    every band found.  f_z1 is the DC zero of the series branch and f_z2
    the shunt-branch pole.  `method` is "numeric" or "closed_form".
    """

    f_cl: float
    f_cu: float
    f_z1: float
    f_z2: float
    method: str
    bands: tuple = ()

    @property
    def empty(self) -> bool:
        return not self.bands


def default_band_search_grid(n_points: int = 20001) -> np.ndarray:
    """Log-spaced search grid spanning 1 MHz .. 10 GHz."""
    return np.geomspace(1e6, 1e10, n_points)


def _refine_edge(c: CircuitValues, f_in: float, f_out: float) -> float:
    """Bisect the propagating-flag transition between two frequencies."""
    while abs(f_out - f_in) > BAND_EDGE_RESOLUTION_HZ:
        mid = 0.5 * (f_in + f_out)
        if _propagating_mask(c, np.array([mid]))[0]:
            f_in = mid
        else:
            f_out = mid
    return 0.5 * (f_in + f_out)


def band_edges_numeric(c: CircuitValues, search=None) -> BandStructure:
    """Scan the dispersion relation for propagating bands.

    The search grid must span at least [1 MHz, 10 GHz] with >= 1e4 points.
    Edges are refined by bisection to 1 kHz.  Finding no band is reported
    (empty BandStructure), not raised.
    """
    if search is None:
        search = default_band_search_grid()
    f = validate_frequency_grid(search)
    if f[0] > 1e6 or f[-1] < 1e10 or f.size < 10_000:
        raise InvalidInputError(
            "band search grid must span [1 MHz, 10 GHz] with at least 1e4 points"
        )
    mask = _propagating_mask(c, f)
    bands = []
    i = 0
    n = f.size
    while i < n:
        if not mask[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and mask[j + 1]:
            j += 1
        lo = _refine_edge(c, f[i], f[i - 1]) if i > 0 else f[0]
        hi = _refine_edge(c, f[j], f[j + 1]) if j + 1 < n else f[-1]
        bands.append((lo, hi))
        i = j + 1
    f_z2 = admittance_pole_frequency(c)
    if bands:
        f_cl, f_cu = bands[0]
    else:
        f_cl = f_cu = math.nan
    return BandStructure(
        f_cl=f_cl, f_cu=f_cu, f_z1=0.0, f_z2=f_z2, method="numeric",
        bands=tuple(bands),
    )


def band_edges_closed_form(c: CircuitValues) -> BandStructure:
    """Evaluate the printed closed-form cutoff expressions.

    f_cu = 1/(2*pi*sqrt(L*C_i)) and f_cl = sqrt(b - sqrt(b^2 - 4*a*c)) /
    (2*pi*sqrt(2*a)) with

        a = C*L*L_c*C_c*C_i
        b = C*L*C_i + 8*C_i*L_c*(C_c + C) + L_c*C_c
        c = 8*C_i + C

    where the total capacitance C_t = C_u + C_d stands in for the otherwise
    undefined symbol C.  The b coefficient mixes F^2*H with F*H terms, so
    this path is kept for fidelity only; see dual_band_report().
    """
    L = c.L
    ci = complex(c.C_i).real
    ct = complex(c.C_t).real
    lc, cc = c.L_c, c.C_c
    f_cu = series_zero_frequency(c)
    a_ = ct * L * lc * cc * ci
    b_ = ct * L * ci + 8.0 * ci * lc * (cc + ct) + lc * cc
    c_ = 8.0 * ci + ct
    disc = b_ * b_ - 4.0 * a_ * c_
    if disc < 0:
        raise ClosedFormInapplicableError(
            f"negative discriminant b^2 - 4ac = {disc:.6e}; closed form inapplicable"
        )
    # b - sqrt(b^2 - 4ac) cancels catastrophically when 4ac << b^2, so use
    # the equivalent 4ac / (b + sqrt(disc)).
    radicand = 4.0 * a_ * c_ / (b_ + math.sqrt(disc))
    f_cl = math.sqrt(radicand) / (2.0 * np.pi * math.sqrt(2.0 * a_))
    return BandStructure(
        f_cl=f_cl, f_cu=f_cu, f_z1=0.0, f_z2=admittance_pole_frequency(c),
        method="closed_form", bands=((f_cl, f_cu),),
    )


def unit_cell(c: CircuitValues, f) -> TwoPort:
    """Symmetric T-cell [series Z/2] [shunt Y] [series Z/2]."""
    z_half = series_impedance(c, f) / 2.0
    y = shunt_admittance(c, f, guard_pole=False)
    half = abcd_series(z_half)
    return cascade(half, abcd_shunt(y), half)


@dataclass(frozen=True, eq=False)
class Sweep:
    """S-parameters of n_cells cascaded cells over a frequency grid.

    Pole-proximate frequencies are masked (S entries NaN, masked flag set),
    never silently dropped.
    """

    frequency_hz: np.ndarray
    s: SParams
    masked: np.ndarray
    n_cells: int

    @property
    def reference_impedance(self) -> float:
        return self.s.reference_impedance

    def s21_db(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 20.0 * np.log10(np.abs(self.s.s21))

    def s11_db(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return 20.0 * np.log10(np.abs(self.s.s11))

    def s21_phase_deg_unwrapped(self) -> np.ndarray:
        """Unwrapped s21 phase in degrees; masked points are NaN and the
        unwrap runs over the surviving points in grid order."""
        out = np.full(self.frequency_hz.shape, np.nan)
        ok = ~self.masked
        if np.any(ok):
            out[ok] = np.degrees(unwrap_phase(np.angle(self.s.s21[ok])))
        return out


def s_parameters(
    c: CircuitValues,
    grid,
    z0: float = Z0_DEFAULT,
    n_cells: int = 1,
) -> Sweep:
    """Sweep the cascaded cell over a frequency grid.

    Builds the T-cell per frequency, cascades n_cells copies, and converts
    to scattering parameters referenced to z0.
    """
    f = validate_frequency_grid(grid)
    if n_cells < 1:
        raise InvalidInputError(f"n_cells must be >= 1, got {n_cells}")
    f_pole = admittance_pole_frequency(c)
    masked = np.abs(f - f_pole) <= POLE_RTOL * f_pole
    shape = f.shape
    s11 = np.full(shape, np.nan, dtype=complex)
    s21 = np.full(shape, np.nan, dtype=complex)
    s12 = np.full(shape, np.nan, dtype=complex)
    s22 = np.full(shape, np.nan, dtype=complex)
    ok = ~masked
    if np.any(ok):
        cell = unit_cell(c, f[ok])
        net = cell
        for _ in range(n_cells - 1):
            net = cascade(net, cell)
        sp = abcd_to_s(net, z0)
        s11[ok], s21[ok], s12[ok], s22[ok] = sp.s11, sp.s21, sp.s12, sp.s22
    return Sweep(
        frequency_hz=f,
        s=SParams(s11, s21, s12, s22, reference_impedance=z0),
        masked=masked,
        n_cells=n_cells,
    )


def dual_band_report(c: CircuitValues, search=None) -> dict:
    """Run both band-edge methods and tabulate their disagreement.

    Returns a JSON-friendly dict carrying both BandStructure results, the
    ratios between them, and the standing discrepancies that the model does
    not tune away (printed-coefficient units; the reported 103 MHz hardware
    zero versus the computed shunt pole).
    """
    numeric = band_edges_numeric(c, search)
    closed_err = None
    try:
        closed = band_edges_closed_form(c)
    except ClosedFormInapplicableError as exc:
        closed = None
        closed_err = str(exc)

    def _band_dict(b: BandStructure | None) -> dict | None:
        if b is None:
            return None
        return {
            "f_cl_hz": b.f_cl,
            "f_cu_hz": b.f_cu,
            "f_z1_hz": b.f_z1,
            "f_z2_hz": b.f_z2,
            "method": b.method,
            "bands_hz": [[lo, hi] for lo, hi in b.bands],
        }

    disagreement = None
    if closed is not None and not numeric.empty:
        disagreement = {
            "f_cl_ratio_closed_over_numeric": closed.f_cl / numeric.f_cl,
            "f_cu_ratio_closed_over_numeric": closed.f_cu / numeric.f_cu,
        }
    f_z2 = admittance_pole_frequency(c)
    discrepancies = [
        {
            "id": "closed-form-coefficient-units",
            "description": (
                "the printed middle coefficient of the lower-cutoff radical mixes "
                "F^2*H and F*H terms, so the closed-form f_cl is not dimensionally "
                "meaningful; the numeric scan of the dispersion relation is "
                "authoritative"
            ),
        },
        {
            "id": "reported-zero-vs-model-pole",
            "description": (
                "the reference hardware reports a zero-transfer frequency near "
                "103 MHz, while the bundled reference circuit values place the "
                "shunt-branch pole elsewhere; the model evaluates the printed "
                "values faithfully instead of tuning them to agree"
            ),
            "reported_zero_hz": REPORTED_ZERO_TRANSFER_HZ,
            "model_pole_hz": f_z2,
        },
    ]
    return {
        "closed_form": _band_dict(closed),
        "closed_form_error": closed_err,
        "numeric": _band_dict(numeric),
        "disagreement": disagreement,
        "discrepancies": discrepancies,
    }
