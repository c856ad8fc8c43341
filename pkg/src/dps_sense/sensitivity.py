"""Phase sensitivity of the shifter to the MUT permittivity.

The sensed quantity is the phase difference between the reference signal
and the shifter output,

    delta_theta = phase(reference) - phase(output) = -arg(s21)  [degrees],

so an ideal delay line shows a positive phase difference, matching the
plain-microstrip baseline below.  The sensitivity is the derivative of
delta_theta with respect to the real MUT permittivity; the analytic form
is impractical, so central finite differences are used, and the derivative
is also assembled from its two capacitance channels

    d(dtheta)/d(eps) = d(dtheta)/dC_u * dC_u/d(eps) + d(dtheta)/dC_i * dC_i/d(eps)

as a cross-check (the chain-rule identity holds because the MUT reaches the
circuit only through C_u and C_i).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .dps import CircuitValues, admittance_pole_frequency, s_parameters, unit_cell
from .errors import InvalidInputError, PoleProximityError, StepSizeError
from .geometry import GeometrySpec, MutPermittivity, extract_circuit, geometry_hash
from .twoport import abcd_to_s, validate_frequency_grid
from .constants import POLE_RTOL, Z0_DEFAULT

__all__ = [
    "PhaseResponse",
    "SensitivityMap",
    "microstrip_baseline",
    "phase_response",
    "dps_sensitivity",
    "sensitivity_map",
    "vwc_referred_sensitivity",
]


def microstrip_baseline(delay_per_mm: float, f: float, length_mm: float) -> dict:
    """Phase difference of a plain microstrip delay line.

    For a line with `delay_per_mm` seconds of delay per millimeter driven at
    f hertz, the phase difference is 360*f*delay_per_mm per millimeter; a
    5.5 ps/mm line at 120 MHz gives about 0.23 deg/mm, i.e. roughly 23 deg
    over 100 mm.  The per-unit-permittivity sensitivity `s_m` of such a line
    is conventionally quoted as this same accumulated phase for the worked
    case, which is returned alongside the per-mm figure.
    """
    if delay_per_mm < 0 or f <= 0 or length_mm < 0:
        raise InvalidInputError("delay, frequency, and length must be positive")
    per_mm = 360.0 * f * delay_per_mm
    phase = per_mm * length_mm
    return {"phase_deg": phase, "phase_deg_per_mm": per_mm, "s_m_deg": phase}


@dataclass(frozen=True)
class PhaseResponse:
    """Sensed phase difference (deg) and transmission level (dB) at one tone."""

    delta_theta_deg: float
    loss_db: float


def _single_tone(c: CircuitValues, f_exc: float, z0: float, n_cells: int):
    f_pole = admittance_pole_frequency(c)
    if abs(f_exc - f_pole) <= POLE_RTOL * f_pole:
        raise PoleProximityError(
            f"excitation {f_exc:.6e} Hz sits on the shunt-branch pole at "
            f"{f_pole:.6e} Hz; choose a different excitation frequency"
        )
    sw = s_parameters(c, np.array([f_exc]), z0=z0, n_cells=n_cells)
    s21 = complex(sw.s.s21[0])
    theta = -math.degrees(np.angle(s21))
    loss = 20.0 * math.log10(abs(s21))
    return theta, loss


def phase_response(
    g: GeometrySpec,
    inductors: dict | None,
    mut: MutPermittivity,
    f_exc: float,
    *,
    z0: float = Z0_DEFAULT,
    n_cells: int = 1,
) -> PhaseResponse:
    """Extract the circuit for `mut` and evaluate it at the excitation tone."""
    if f_exc <= 0:
        raise InvalidInputError(f"f_exc must be > 0, got {f_exc}")
    c = extract_circuit(g, mut, inductors)
    theta, loss = _single_tone(c, f_exc, z0, n_cells)
    return PhaseResponse(delta_theta_deg=theta, loss_db=loss)


def _wrapped_delta_deg(t2: float, t1: float) -> float:
    """Phase difference t2 - t1 mapped to (-180, 180] degrees."""
    return (t2 - t1 + 180.0) % 360.0 - 180.0


def _theta_of_circuit(c: CircuitValues, f_exc: float, z0: float, n_cells: int) -> float:
    sp = abcd_to_s(unit_cell(c, f_exc), z0)
    if n_cells != 1:
        sw = s_parameters(c, np.array([f_exc]), z0=z0, n_cells=n_cells)
        return -math.degrees(np.angle(complex(sw.s.s21[0])))
    return -math.degrees(np.angle(complex(sp.s21)))


def _sensitivity_once(
    g, inductors, eps_real, eps_imag, f_exc, h, z0, n_cells
) -> float:
    tp = _theta_of_circuit(
        extract_circuit(g, MutPermittivity(eps_real + h, eps_imag), inductors),
        f_exc, z0, n_cells,
    )
    tm = _theta_of_circuit(
        extract_circuit(g, MutPermittivity(eps_real - h, eps_imag), inductors),
        f_exc, z0, n_cells,
    )
    return _wrapped_delta_deg(tp, tm) / (2.0 * h)


def _chain_rule_terms(
    g, inductors, eps_real, eps_imag, f_exc, h, z0, n_cells
) -> dict:
    """The two capacitance-channel terms of the sensitivity.

    Each channel contributes dtheta/dRe(C)*dRe(C)/deps + dtheta/dIm(C)*dIm(C)/deps
    (the imaginary leg vanishes for a lossless MUT).
    """
    base = extract_circuit(g, MutPermittivity(eps_real, eps_imag), inductors)
    plus = extract_circuit(g, MutPermittivity(eps_real + h, eps_imag), inductors)
    minus = extract_circuit(g, MutPermittivity(eps_real - h, eps_imag), inductors)

    def channel(name: str) -> float:
        c0 = complex(getattr(base, name))
        dc_deps = (complex(getattr(plus, name)) - complex(getattr(minus, name))) / (2.0 * h)
        total = 0.0
        for part, dpart in (("re", dc_deps.real), ("im", dc_deps.imag)):
            if dpart == 0.0:
                continue
            step = max(abs(c0.real), 1e-18) * 1e-6
            delta = step if part == "re" else 1j * step
            tp = _theta_of_circuit(replace(base, **{name: c0 + delta}), f_exc, z0, n_cells)
            tm = _theta_of_circuit(replace(base, **{name: c0 - delta}), f_exc, z0, n_cells)
            total += _wrapped_delta_deg(tp, tm) / (2.0 * step) * dpart
        return total

    return {"C_u": channel("C_u"), "C_i": channel("C_i")}


def dps_sensitivity(
    g: GeometrySpec,
    inductors: dict | None,
    eps_real: float,
    f_exc: float,
    h: float = 1e-3,
    *,
    eps_imag: float = 0.0,
    z0: float = Z0_DEFAULT,
    n_cells: int = 1,
    check_convergence: bool = True,
    return_terms: bool = False,
):
    """Sensitivity d(delta_theta)/d(eps_real) in degrees per unit permittivity.

    Central difference with step h.  With check_convergence the step is
    halved twice and the derivative must settle to within 10% between the
    last two estimates.  With return_terms the two chain-rule channel terms
    are returned alongside the direct derivative.
    """
    if eps_real < 1.0 + h:
        raise InvalidInputError(f"eps_real must be >= 1 + h, got {eps_real}")
    args = (g, inductors, eps_real, eps_imag, f_exc, h, z0, n_cells)
    s_h = _sensitivity_once(*args)
    if check_convergence:
        s_h2 = _sensitivity_once(g, inductors, eps_real, eps_imag, f_exc, h / 2, z0, n_cells)
        s_h4 = _sensitivity_once(g, inductors, eps_real, eps_imag, f_exc, h / 4, z0, n_cells)
        scale = max(abs(s_h2), abs(s_h4), 1e-30)
        if abs(s_h4 - s_h2) > 0.10 * scale:
            raise StepSizeError(
                f"sensitivity did not converge under step halving at eps={eps_real}, "
                f"f={f_exc:.4e}: {s_h:.6g} -> {s_h2:.6g} -> {s_h4:.6g}"
            )
    if return_terms:
        terms = _chain_rule_terms(g, inductors, eps_real, eps_imag, f_exc, h, z0, n_cells)
        return s_h, terms
    return s_h


@dataclass(frozen=True, eq=False)
class SensitivityMap:
    """Sensitivity over a frequency x permittivity grid.

    `s_dps` has shape (len(frequencies), len(eps_grid)).  `f_optimal` is the
    in-band frequency maximizing the mean |sensitivity| across the grid
    (first occurrence wins on ties, preferring the band edge).  `band_hz`
    is the frequency interval propagating at every grid permittivity.
    """

    frequencies: np.ndarray
    eps_grid: np.ndarray
    s_dps: np.ndarray
    f_optimal: float
    band_hz: tuple
    geometry_hash: str
    step: float

    def report(self) -> dict:
        return {
            "f_optimal_hz": self.f_optimal,
            "band_hz": list(self.band_hz),
            "geometry_hash": self.geometry_hash,
            "finite_difference_step": self.step,
            "n_frequencies": int(self.frequencies.size),
            "eps_grid": [float(e) for e in self.eps_grid],
        }


def _theta_sweep(g, inductors, eps, f_grid, z0, n_cells) -> np.ndarray:
    c = extract_circuit(g, MutPermittivity(float(eps), 0.0), inductors)
    sw = s_parameters(c, f_grid, z0=z0, n_cells=n_cells)
    return -np.degrees(np.angle(sw.s.s21))


def sensitivity_map(
    g: GeometrySpec,
    inductors: dict | None,
    f_grid,
    eps_grid,
    *,
    h: float = 1e-3,
    z0: float = Z0_DEFAULT,
    n_cells: int = 1,
) -> SensitivityMap:
    """Tabulate the sensitivity over (frequency, permittivity).

    Deterministic: the argmax reduction scans frequencies in grid order.
    """
    from .dps import _propagating_mask  # grid flags, shared with band search

    f = validate_frequency_grid(f_grid)
    eps = np.asarray(eps_grid, dtype=float)
    if eps.ndim != 1 or eps.size == 0 or np.any(eps < 1.0 + h):
        raise InvalidInputError("eps_grid must be 1-D with all values >= 1 + h")

    s = np.empty((f.size, eps.size))
    in_band = np.ones(f.size, dtype=bool)
    for j, e in enumerate(eps):
        tp = _theta_sweep(g, inductors, e + h, f, z0, n_cells)
        tm = _theta_sweep(g, inductors, e - h, f, z0, n_cells)
        d = (tp - tm + 180.0) % 360.0 - 180.0
        s[:, j] = d / (2.0 * h)
        c = extract_circuit(g, MutPermittivity(float(e), 0.0), inductors)
        in_band &= _propagating_mask(c.lossless(), f)

    if not np.any(in_band):
        raise InvalidInputError(
            "no frequency in the grid propagates at every grid permittivity"
        )
    mean_abs = np.mean(np.abs(s), axis=1)
    candidates = np.flatnonzero(in_band)
    f_opt = float(f[candidates[np.argmax(mean_abs[candidates])]])
    band = (float(f[candidates[0]]), float(f[candidates[-1]]))
    return SensitivityMap(
        frequencies=f,
        eps_grid=eps,
        s_dps=s,
        f_optimal=f_opt,
        band_hz=band,
        geometry_hash=geometry_hash(g),
        step=h,
    )


def vwc_referred_sensitivity(s_dps: float, d_eps_d_vwc: float) -> float:
    """Convert deg-per-permittivity sensitivity to deg per %VWC.

    Multiplies by the calibration-curve slope d(eps')/d(VWC%); e.g. 7 deg
    per unit permittivity with a 0.5 slope gives 3.5 deg/%VWC.
    """
    from .errors import DegenerateCalibrationError

    if d_eps_d_vwc == 0:
        raise DegenerateCalibrationError("calibration slope d(eps)/d(VWC) is zero")
    return s_dps * d_eps_d_vwc
