"""Soil calibration, detector voltage model, and permittivity inversion.

The calibration curve maps volumetric water content (VWC, percent) to the
complex sand permittivity near the operating band; the bundled default is
the seven-knot sand table from 0 to 30 %VWC.  Note the bundled VWC figure is
gravimetric (water weight over total weight) even though it is named
volumetric throughout; the weighing formula is kept as published.

The detector stage models an AD8302-class phase/gain detector: phase folded
into [0, 180] degrees at 10 mV/degree and loss over +/-30 dB at 30 mV/dB.
Only the slopes and ranges are data-sheet facts; the voltage anchors (1.8 V
at 0 degrees, 0.9 V at 0 dB, descending phase slope) follow the part's
typical transfer characteristic and live in DetectorModel as configuration,
not hard-coded truths.

Inversion runs the forward model (geometry extraction -> single-tone
response -> folding) over a coarse permittivity grid and then refines the
best cell with a deterministic compass search; no gradients, no randomness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.optimize import brentq

from .errors import (
    DegenerateCalibrationError,
    ExtrapolationRefusedError,
    InvalidInputError,
    NoFitError,
    RangeError,
)
from .geometry import GeometrySpec, MutPermittivity
from .sensitivity import phase_response
from .constants import Z0_DEFAULT

__all__ = [
    "SoilCalibrationCurve",
    "DEFAULT_SAND_CURVE",
    "DetectorModel",
    "DEFAULT_DETECTOR",
    "DetectorReading",
    "InversionResult",
    "vwc_from_weights",
    "permittivity_from_vwc",
    "vwc_from_permittivity",
    "fold_phase_deg",
    "detector_encode",
    "detector_decode",
    "invert_permittivity",
    "estimation_error",
    "resolution",
]


def vwc_from_weights(w_dry: float, w_water: float) -> float:
    """Water content in percent from dried-soil and added-water weights:
    100 * w_water / (w_dry + w_water)."""
    if w_dry <= 0:
        raise InvalidInputError(f"dry weight must be > 0, got {w_dry}")
    if w_water < 0:
        raise InvalidInputError(f"water weight must be >= 0, got {w_water}")
    return 100.0 * w_water / (w_dry + w_water)


class SoilCalibrationCurve:
    """VWC <-> complex permittivity lookup with a fixed interpolation mode.

    Knots must have strictly increasing VWC and eps_real (so the real-part
    map is invertible) and non-decreasing eps_imag.  Interpolation is
    'linear' (default) or 'monotone_cubic' (shape-preserving cubic); both
    reproduce the knots exactly.
    """

    def __init__(self, points, interpolation: str = "linear"):
        pts = [(float(v), float(er), float(ei)) for v, er, ei in points]
        if len(pts) < 2:
            raise InvalidInputError("calibration curve needs at least two knots")
        vwc = np.array([p[0] for p in pts])
        er = np.array([p[1] for p in pts])
        ei = np.array([p[2] for p in pts])
        if not np.all(np.diff(vwc) > 0):
            raise InvalidInputError("curve VWC values must be strictly increasing")
        if not np.all(np.diff(er) > 0):
            raise InvalidInputError(
                "curve eps_real must be strictly increasing for invertibility"
            )
        if not np.all(np.diff(ei) >= 0):
            raise InvalidInputError("curve eps_imag must be non-decreasing")
        if interpolation not in ("linear", "monotone_cubic"):
            raise InvalidInputError(f"unknown interpolation mode {interpolation!r}")
        self.points = tuple(pts)
        self.interpolation = interpolation
        self._vwc, self._er, self._ei = vwc, er, ei
        if interpolation == "monotone_cubic":
            self._er_pchip = PchipInterpolator(vwc, er)
            self._ei_pchip = PchipInterpolator(vwc, ei)

    @property
    def vwc_range(self) -> tuple:
        return float(self._vwc[0]), float(self._vwc[-1])

    @property
    def eps_real_range(self) -> tuple:
        return float(self._er[0]), float(self._er[-1])

    def _check_vwc(self, vwc: float) -> None:
        lo, hi = self.vwc_range
        if not (lo <= vwc <= hi):
            nearest = lo if vwc < lo else hi
            raise ExtrapolationRefusedError(
                f"VWC {vwc} outside the calibration range [{lo}, {hi}]", nearest
            )

    def eps_from_vwc(self, vwc: float) -> MutPermittivity:
        self._check_vwc(float(vwc))
        i = np.searchsorted(self._vwc, vwc)
        if i < self._vwc.size and self._vwc[i] == vwc:
            return MutPermittivity(float(self._er[i]), float(self._ei[i]))
        if self.interpolation == "linear":
            er = float(np.interp(vwc, self._vwc, self._er))
            ei = float(np.interp(vwc, self._vwc, self._ei))
        else:
            er = float(self._er_pchip(vwc))
            ei = float(self._ei_pchip(vwc))
        return MutPermittivity(er, ei)

    def vwc_from_eps_real(self, eps_real: float) -> float:
        lo, hi = self.eps_real_range
        if not (lo <= eps_real <= hi):
            nearest = lo if eps_real < lo else hi
            raise ExtrapolationRefusedError(
                f"eps_real {eps_real} outside the calibration range [{lo}, {hi}]",
                nearest,
            )
        i = np.searchsorted(self._er, eps_real)
        if i < self._er.size and self._er[i] == eps_real:
            return float(self._vwc[i])
        if self.interpolation == "linear":
            return float(np.interp(eps_real, self._er, self._vwc))
        lo_v, hi_v = self.vwc_range
        return float(
            brentq(lambda v: float(self._er_pchip(v)) - eps_real, lo_v, hi_v,
                   xtol=1e-12, rtol=8.9e-16)
        )

    def slope_eps_real(self, vwc: float) -> float:
        """d(eps_real)/d(VWC%) at `vwc` (segment secant in linear mode)."""
        self._check_vwc(float(vwc))
        if self.interpolation == "monotone_cubic":
            return float(self._er_pchip.derivative()(vwc))
        i = int(np.searchsorted(self._vwc, vwc, side="right")) - 1
        i = min(max(i, 0), self._vwc.size - 2)
        return float(
            (self._er[i + 1] - self._er[i]) / (self._vwc[i + 1] - self._vwc[i])
        )

    def with_interpolation(self, interpolation: str) -> "SoilCalibrationCurve":
        return SoilCalibrationCurve(self.points, interpolation)

    @classmethod
    def from_csv(cls, path, interpolation: str = "linear") -> "SoilCalibrationCurve":
        """Load knots from CSV with header vwc_percent,eps_real,eps_imag."""
        lines = Path(path).read_text().strip().splitlines()
        if not lines or lines[0].strip().lower() != "vwc_percent,eps_real,eps_imag":
            raise InvalidInputError(
                f"{path}: expected header 'vwc_percent,eps_real,eps_imag'"
            )
        pts = []
        for line in lines[1:]:
            if not line.strip():
                continue
            fields = line.split(",")
            if len(fields) != 3:
                raise InvalidInputError(f"{path}: malformed row {line!r}")
            pts.append(tuple(float(x) for x in fields))
        return cls(pts, interpolation)

    def to_csv(self, path) -> None:
        rows = ["vwc_percent,eps_real,eps_imag"]
        rows += [f"{v:g},{er:g},{ei:g}" for v, er, ei in self.points]
        Path(path).write_text("\n".join(rows) + "\n")


# Sand near the operating band, 0..30 %VWC.
DEFAULT_SAND_CURVE = SoilCalibrationCurve(
    [
        (0, 2.5, 0.05),
        (5, 6, 0.5),
        (10, 8, 0.9),
        (15, 14.5, 1.8),
        (20, 18, 2.5),
        (25, 21, 3.1),
        (30, 23.5, 3.5),
    ]
)


def permittivity_from_vwc(curve: SoilCalibrationCurve, vwc: float) -> MutPermittivity:
    """Interpolated (eps', eps'') at a water content; exact at the knots."""
    return curve.eps_from_vwc(vwc)


def vwc_from_permittivity(curve: SoilCalibrationCurve, eps_real: float) -> float:
    """Inverse lookup on the strictly increasing eps'(VWC); exact at knots."""
    return curve.vwc_from_eps_real(eps_real)


@dataclass(frozen=True)
class DetectorModel:
    """Transfer characteristic of the phase/gain detector.

    Slopes and spans are data-sheet values; the anchors are the typical
    transfer characteristic and are configurable.
    """

    phase_slope_v_per_deg: float = 0.010   # descending from the 0-degree anchor
    loss_slope_v_per_db: float = 0.030
    v_phase_at_zero_deg: float = 1.8
    v_loss_at_zero_db: float = 0.9
    v_min: float = 0.0
    v_max: float = 1.8
    loss_span_db: float = 30.0
    phase_quantum_deg: float = 0.1
    loss_quantum_db: float = 0.1


DEFAULT_DETECTOR = DetectorModel()


@dataclass(frozen=True)
class DetectorReading:
    """Detector output voltages: v_p (phase channel), v_m (loss channel)."""

    v_p: float
    v_m: float

    def __post_init__(self):
        for name, v in (("v_p", self.v_p), ("v_m", self.v_m)):
            if not (DEFAULT_DETECTOR.v_min <= v <= DEFAULT_DETECTOR.v_max):
                raise RangeError(
                    f"{name} = {v} V outside the detector output range "
                    f"[{DEFAULT_DETECTOR.v_min}, {DEFAULT_DETECTOR.v_max}] V"
                )


def fold_phase_deg(phi_deg: float) -> float:
    """Fold any phase difference into the detector's [0, 180] degree window."""
    return abs((phi_deg + 180.0) % 360.0 - 180.0)


def _quantize(value: float, quantum: float) -> float:
    return round(value / quantum) * quantum


def detector_encode(
    delta_phi_deg: float,
    loss_db: float,
    *,
    quantize: bool = False,
    detector: DetectorModel = DEFAULT_DETECTOR,
) -> DetectorReading:
    """Map a phase difference and loss onto detector voltages.

    The phase is folded into [0, 180] degrees first; the loss must lie
    within the +/-30 dB span.  With `quantize` the folded phase and loss are
    rounded to the instrument's 0.1-degree / 0.1-dB accuracy before
    encoding.
    """
    if not (-detector.loss_span_db <= loss_db <= detector.loss_span_db):
        raise RangeError(
            f"loss {loss_db} dB outside +/-{detector.loss_span_db} dB detector span"
        )
    folded = fold_phase_deg(delta_phi_deg)
    if quantize:
        folded = _quantize(folded, detector.phase_quantum_deg)
        loss_db = _quantize(loss_db, detector.loss_quantum_db)
    v_p = detector.v_phase_at_zero_deg - detector.phase_slope_v_per_deg * folded
    v_m = detector.v_loss_at_zero_db + detector.loss_slope_v_per_db * loss_db
    return DetectorReading(v_p=v_p, v_m=v_m)


def detector_decode(
    reading: DetectorReading,
    *,
    snap: bool = False,
    detector: DetectorModel = DEFAULT_DETECTOR,
) -> dict:
    """Invert the encode map back to (folded phase, loss).

    With `snap` the results are snapped to the quantization lattice, making
    decode(encode(.)) exact for lattice inputs instead of merely within
    floating-point rounding.
    """
    folded = (detector.v_phase_at_zero_deg - reading.v_p) / detector.phase_slope_v_per_deg
    loss = (reading.v_m - detector.v_loss_at_zero_db) / detector.loss_slope_v_per_db
    if snap:
        folded = _quantize(folded, detector.phase_quantum_deg)
        loss = _quantize(loss, detector.loss_quantum_db)
    return {"folded_phase_deg": folded, "loss_db": loss}


@dataclass
class InversionResult:
    """Outcome of a detector-reading inversion."""

    eps: MutPermittivity
    vwc_percent: float | None
    residual: float
    iterations: int
    converged: bool
    warnings: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "eps_real": self.eps.eps_real,
            "eps_imag": self.eps.eps_imag,
            "vwc_percent": self.vwc_percent,
            "residual": self.residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "warnings": list(self.warnings),
        }


# Inversion search domain and schedule (deterministic).
_EPS_RE_BOUNDS = (1.0, 30.0)
_EPS_IM_BOUNDS = (0.0, 5.0)
_COARSE_STEPS = (0.5, 0.25)
_RESIDUAL_TOL = 1e-6
_MAX_POLLS = 200
_NO_FIT_RESIDUAL = 3.0


def _forward_reading(g, inductors, f_exc, eps_re, eps_im, z0, n_cells) -> tuple:
    pr = phase_response(
        g, inductors, MutPermittivity(eps_re, eps_im), f_exc, z0=z0, n_cells=n_cells
    )
    return fold_phase_deg(pr.delta_theta_deg), pr.loss_db


def _ambiguity_warnings(g, inductors, f_exc, curve, z0, n_cells) -> list:
    """Warn when the folded phase is not monotone along the calibration path."""
    folded = []
    for vwc, er, ei in curve.points:
        try:
            f, _ = _forward_reading(g, inductors, f_exc, er, ei, z0, n_cells)
        except Exception:
            return [f"forward model not evaluable along the curve at {f_exc:.4e} Hz"]
        folded.append((vwc, f))
    diffs = np.diff([f for _, f in folded])
    if np.all(diffs > 0) or np.all(diffs < 0):
        return []
    flips = [folded[i + 1][0] for i in range(len(diffs) - 1)
             if np.sign(diffs[i + 1]) != np.sign(diffs[i])]
    return [
        "folded phase is not monotone along the calibration curve at "
        f"{f_exc:.4e} Hz; candidate branches near VWC {flips}"
    ]


def invert_permittivity(
    reading: DetectorReading,
    g: GeometrySpec,
    inductors: dict | None,
    f_exc: float,
    curve: SoilCalibrationCurve = DEFAULT_SAND_CURVE,
    *,
    detector: DetectorModel = DEFAULT_DETECTOR,
    z0: float = Z0_DEFAULT,
    n_cells: int = 1,
) -> InversionResult:
    """Recover (eps', eps'') and VWC from one detector reading.

    Minimizes the accuracy-weighted residual

        || (theta_model - theta_meas)/0.1 deg, (loss_model - loss_meas)/0.1 dB ||_2

    with a coarse grid over eps' in [1, 30] x eps'' in [0, 5] followed by a
    compass-search refinement (step halving, bounds clamped, at most 200
    polls).  A residual above 3.0 after refinement means the reading is
    inconsistent with the model and raises NoFitError.  An eps' outside the
    calibration curve yields vwc_percent None plus a warning.
    """
    decoded = detector_decode(reading, detector=detector)
    theta_meas = decoded["folded_phase_deg"]
    loss_meas = decoded["loss_db"]
    w_th = detector.phase_quantum_deg
    w_lo = detector.loss_quantum_db

    def residual(eps_re: float, eps_im: float) -> float:
        th, lo = _forward_reading(g, inductors, f_exc, eps_re, eps_im, z0, n_cells)
        return math.hypot((th - theta_meas) / w_th, (lo - loss_meas) / w_lo)

    # Stage 1: coarse grid.
    re_grid = np.arange(_EPS_RE_BOUNDS[0], _EPS_RE_BOUNDS[1] + 1e-12, _COARSE_STEPS[0])
    im_grid = np.arange(_EPS_IM_BOUNDS[0], _EPS_IM_BOUNDS[1] + 1e-12, _COARSE_STEPS[1])
    best = (math.inf, _EPS_RE_BOUNDS[0], _EPS_IM_BOUNDS[0])
    for er in re_grid:
        for ei in im_grid:
            r = residual(float(er), float(ei))
            if r < best[0]:
                best = (r, float(er), float(ei))

    # Stage 2: compass search from the best cell.
    r_best, x, y = best
    step_x, step_y = _COARSE_STEPS
    polls = 0
    while r_best > _RESIDUAL_TOL and polls < _MAX_POLLS:
        polls += 1
        candidates = []
        for nx, ny in ((x + step_x, y), (x - step_x, y), (x, y + step_y), (x, y - step_y)):
            nx = min(max(nx, _EPS_RE_BOUNDS[0]), _EPS_RE_BOUNDS[1])
            ny = min(max(ny, _EPS_IM_BOUNDS[0]), _EPS_IM_BOUNDS[1])
            candidates.append((residual(nx, ny), nx, ny))
        cand_best = min(candidates, key=lambda t: t[0])
        if cand_best[0] < r_best:
            r_best, x, y = cand_best
        else:
            step_x /= 2.0
            step_y /= 2.0
            if step_x < 1e-9 and step_y < 1e-9:
                break

    if r_best > _NO_FIT_RESIDUAL:
        raise NoFitError(
            f"reading inconsistent with the forward model (residual {r_best:.3g} "
            f"at eps=({x:.3g}, {y:.3g}))",
            residual=r_best,
        )

    warnings = _ambiguity_warnings(g, inductors, f_exc, curve, z0, n_cells)
    eps = MutPermittivity(x, y)
    try:
        vwc = vwc_from_permittivity(curve, x)
    except ExtrapolationRefusedError:
        vwc = None
        warnings.append(
            f"eps_real {x:.4g} outside the calibration curve; VWC unavailable"
        )
    return InversionResult(
        eps=eps,
        vwc_percent=vwc,
        residual=r_best,
        iterations=polls,
        converged=r_best <= _RESIDUAL_TOL,
        warnings=warnings,
    )


def estimation_error(eps_meas: float, eps_nominal: float) -> float:
    """Relative estimation error in percent: |meas - nominal| / nominal * 100."""
    if eps_nominal <= 0:
        raise InvalidInputError(f"nominal permittivity must be > 0, got {eps_nominal}")
    return abs(eps_meas - eps_nominal) / eps_nominal * 100.0


def resolution(sensitivity_deg_per_vwc: float, phase_accuracy_deg: float) -> float:
    """Smallest resolvable VWC step (percent) for a given phase accuracy."""
    if sensitivity_deg_per_vwc <= 0:
        raise DegenerateCalibrationError(
            f"sensitivity must be > 0, got {sensitivity_deg_per_vwc}"
        )
    return phase_accuracy_deg / sensitivity_deg_per_vwc
