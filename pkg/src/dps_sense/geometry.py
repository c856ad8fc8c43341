"""Extraction of the shifter's lumped elements from physical geometry.

Covers the four capacitances of the cell:

* C_c - slot-spiral capacitance on the middle layer, a series combination
  over the spiral turns; independent of the material under test (MUT);
* C_d - parallel-plate capacitance between middle layer and ground,
  likewise isolated from the MUT;
* C_u - parallel-plate capacitance between top layer and middle layer with
  a fringing-length correction whose effective permittivity sees the MUT;
* C_i - interdigital capacitance on the top layer, also driven by the
  effective permittivity.

The inductances are not extracted (the MUT does not move them); extraction
takes them as caller inputs.

MUT loss is carried as a complex relative permittivity eps' - j*eps'' and
reaches the circuit only through C_u (multiplicative loss tangent) and C_i
(complex effective permittivity).  All functions are pure and deterministic.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass

import numpy as np

from .constants import EPS0
from .dps import DEFAULT_INDUCTORS, CircuitValues
from .errors import (
    FormulaDomainError,
    GeometryInfeasibleError,
    InvalidInputError,
)

__all__ = [
    "GeometrySpec",
    "MutPermittivity",
    "UNLOADED_MUT",
    "csr_turn_lengths_from_outline",
    "csr_capacitance",
    "effective_permittivity",
    "effective_permittivity_value",
    "effective_length_increment",
    "plate_capacitances",
    "interdigital_capacitance",
    "extract_circuit",
    "geometry_hash",
]


@dataclass(frozen=True)
class MutPermittivity:
    """Relative permittivity of the material under test, eps' - j*eps''.

    The loss part is stored positive (eps_imag >= 0); the sign convention is
    applied where the complex value is formed.
    """

    eps_real: float
    eps_imag: float = 0.0

    def __post_init__(self):
        if not (self.eps_real >= 1.0):
            raise InvalidInputError(f"eps_real must be >= 1, got {self.eps_real}")
        if not (self.eps_imag >= 0.0):
            raise InvalidInputError(f"eps_imag must be >= 0, got {self.eps_imag}")

    @property
    def as_complex(self) -> complex:
        return complex(self.eps_real, -self.eps_imag)


UNLOADED_MUT = MutPermittivity(1.0, 0.0)


@dataclass(frozen=True)
class GeometrySpec:
    """Physical dimensions and material properties of the sensor head.

    Lengths in meters, areas in m^2.  `csr_turn_lengths` holds the slot
    perimeter of each spiral turn, outermost first.  `tan_delta` records the
    substrate dissipation factor for reference; the circuit model carries
    loss only through the MUT, so it does not enter the extraction.
    """

    substrate_eps_r: float      # relative permittivity of the substrate
    h_u: float                  # upper substrate thickness
    h_d: float                  # lower substrate thickness
    t_m: float                  # metal thickness
    a: float                    # top-layer physical width
    b_len: float                # top-layer physical length
    area_d: float               # bottom ground plate area
    csr_turn_lengths: tuple     # per-turn slot lengths P_n
    s_c: float                  # slot-spiral gap width
    l_i: float                  # interdigital finger length
    w_i: float                  # interdigital finger width
    n_fingers: int              # interdigital finger count
    h_m: float                  # MUT thickness above the top layer
    tan_delta: float = 0.0      # substrate dissipation factor (recorded only)

    def __post_init__(self):
        positive = {
            "substrate_eps_r": self.substrate_eps_r,
            "h_u": self.h_u,
            "h_d": self.h_d,
            "t_m": self.t_m,
            "a": self.a,
            "b_len": self.b_len,
            "area_d": self.area_d,
            "s_c": self.s_c,
            "l_i": self.l_i,
            "w_i": self.w_i,
            "h_m": self.h_m,
        }
        for name, v in positive.items():
            if not (v > 0 and math.isfinite(v)):
                raise InvalidInputError(f"{name} must be > 0, got {v}")
        if len(self.csr_turn_lengths) < 1:
            raise InvalidInputError("csr_turn_lengths must have at least one turn")
        if any(p <= 0 for p in self.csr_turn_lengths):
            raise InvalidInputError("all csr turn lengths must be > 0")
        if self.n_fingers < 4:
            raise InvalidInputError(
                f"n_fingers must be >= 4, got {self.n_fingers}"
            )

    @property
    def thick_mut(self) -> bool:
        """True when the MUT is thick enough (h_m >= 10*h_u) for the
        buried-line effective-permittivity formula to apply."""
        return self.h_m >= 10.0 * self.h_u


def csr_turn_lengths_from_outline(
    length: float, width: float, slot_width: float, gap: float, turns: int
) -> tuple:
    """Reconstruct per-turn slot lengths of a rectangular spiral.

    Turn n keeps the outline inset by one pitch (slot + gap) per side from
    turn n-1, so P_n = 2*(L_n + W_n) with L_n = L - 2*(n-1)*p and similarly
    for W_n.  This stands in for per-turn lengths that a layout would give
    directly.
    """
    pitch = slot_width + gap
    lengths = []
    for n in range(turns):
        ln = length - 2.0 * n * pitch
        wn = width - 2.0 * n * pitch
        if ln <= 0 or wn <= 0:
            raise GeometryInfeasibleError(
                f"spiral turn {n + 1} does not fit the {length} x {width} outline"
            )
        lengths.append(2.0 * (ln + wn))
    return tuple(lengths)


def csr_capacitance(g: GeometrySpec, *, rectify_log: bool = False) -> float:
    """Slot-spiral capacitance from the series combination over the turns.

    1/C_c = sum_n 1 / ( eps0*(eps_r+1)/2 * [P_n*t_m/S_c + 2*pi*t_m/ln(8*t_m/P_n)] )

    For turn lengths much larger than the metal thickness the log argument
    drops below one and the printed logarithm goes negative; by default that
    sign is kept (and the bracket must stay positive), while rectify_log=True
    substitutes |ln(.)|.  Independent of the MUT by construction.
    """
    prefactor = EPS0 * (g.substrate_eps_r + 1.0) / 2.0
    inv_c = 0.0
    for n, p_n in enumerate(g.csr_turn_lengths, start=1):
        arg = 8.0 * g.t_m / p_n
        if arg <= 0 or arg == 1.0:
            raise GeometryInfeasibleError(
                f"log argument 8*t_m/P_{n} = {arg} is not usable"
            )
        log_term = math.log(arg)
        if rectify_log:
            log_term = abs(log_term)
        bracket = p_n * g.t_m / g.s_c + 2.0 * math.pi * g.t_m / log_term
        if bracket <= 0:
            raise GeometryInfeasibleError(
                f"turn {n} bracket is {bracket:.3e} <= 0; geometry infeasible"
            )
        inv_c += 1.0 / (prefactor * bracket)
    return 1.0 / inv_c


def effective_permittivity_value(
    g: GeometrySpec, eps_m: complex, form: str = "standard"
) -> complex:
    """Effective relative permittivity of the buried top-layer line.

    eps_eff = (eps_r + eps_m)/2 + (eps_r - eps_m)/2 * F(h_u/a)

    with F = 1/sqrt(1 + 12*h_u/a) in the `standard` quasi-static form and
    F = sqrt(1 + 12*h_u/a) in the `as_printed` variant.  The standard form
    is the default: the multiplicative variant pushes eps_eff outside the
    [eps_m, eps_r] range, which a two-layer quasi-static line cannot do.
    Accepts complex eps_m (vectorizes over numpy arrays); returns a relative
    (dimensionless) permittivity.
    """
    root = np.sqrt(1.0 + 12.0 * g.h_u / g.a)
    if form == "standard":
        f_term = 1.0 / root
    elif form == "as_printed":
        f_term = root
    else:
        raise InvalidInputError(f"unknown effective-permittivity form {form!r}")
    er = g.substrate_eps_r
    return (er + eps_m) / 2.0 + (er - eps_m) / 2.0 * f_term


def effective_permittivity(
    g: GeometrySpec, mut: MutPermittivity, form: str = "standard"
) -> complex:
    """effective_permittivity_value() with the thick-MUT precondition enforced."""
    if not g.thick_mut:
        raise InvalidInputError(
            f"MUT thickness h_m = {g.h_m} is below 10*h_u = {10 * g.h_u}; the "
            "buried-line effective permittivity does not apply"
        )
    return complex(effective_permittivity_value(g, mut.as_complex, form))


def effective_length_increment(
    g: GeometrySpec, eps_eff_real: float, form: str = "as_printed"
) -> float:
    """Fringing length increment of the top plate, meters.

    `as_printed` evaluates the published expression verbatim,

        dL = 0.412*h_u * (eps_eff + 0.3)*(h_u + 0.3)
                        / ((eps_eff - 0.258)*(a/h_u + 0.8))

    whose (h_u + 0.3) factor adds meters to a pure number; the `standard`
    form replaces it with the usual (a/h_u + 0.264).  Both are kept; the
    pipeline records the difference in its diagnostics rather than hiding
    either value.
    """
    if eps_eff_real <= 0.258:
        raise FormulaDomainError(
            f"eps_eff = {eps_eff_real} is at or below the 0.258 denominator zero"
        )
    ratio = g.a / g.h_u
    if form == "as_printed":
        num = (eps_eff_real + 0.3) * (g.h_u + 0.3)
    elif form == "standard":
        num = (eps_eff_real + 0.3) * (ratio + 0.264)
    else:
        raise InvalidInputError(f"unknown length-increment form {form!r}")
    den = (eps_eff_real - 0.258) * (ratio + 0.8)
    return 0.412 * g.h_u * num / den


def plate_capacitances(
    g: GeometrySpec,
    mut: MutPermittivity,
    *,
    eps_form: str = "standard",
    dl_form: str = "as_printed",
) -> dict:
    """Parallel-plate capacitances C_d (real) and C_u (complex), farads.

    C_d = eps0*eps_r*A_d/h_d never sees the MUT.  C_u uses the fringe-grown
    top area A'_u = a*(b + 2*dL) with dL evaluated at the real part of the
    effective permittivity, then takes on the MUT loss through

        C_u <- C_u * (1 - j*tan_delta_eff),   tan_delta_eff = -Im(eps_eff)/Re(eps_eff)

    (the loss tangent is a magnitude; with the e^{+jwt} convention the
    resulting Im(C_u) is <= 0).
    """
    c_d = EPS0 * g.substrate_eps_r * g.area_d / g.h_d
    eps_eff = effective_permittivity(g, mut, form=eps_form)
    d_l = effective_length_increment(g, eps_eff.real, form=dl_form)
    area_u = g.a * (g.b_len + 2.0 * d_l)
    c_u_real = EPS0 * g.substrate_eps_r * area_u / g.h_u
    tan_eff = -eps_eff.imag / eps_eff.real
    c_u = c_u_real * (1.0 - 1j * tan_eff)
    return {"C_d": c_d, "C_u": c_u}


# Finger-geometry coefficients of the interdigital closed form, pF per meter
# of finger length (equivalently the usual pF/um values scaled by 1e6).
def _interdigital_coefficients(g: GeometrySpec) -> tuple:
    ratio = g.h_u / g.w_i
    a1 = 4.409 * math.tanh(0.55 * ratio**0.45)
    a2 = 9.92 * math.tanh(0.52 * ratio**0.5)
    return a1, a2


def interdigital_capacitance(g: GeometrySpec, eps_eff: complex) -> complex:
    """Interdigital capacitance, farads (complex when eps_eff is lossy).

    C_i [pF] = (eps_eff + 1) * l_i * ((N - 3)*A_1 + A_2)

    with l_i in meters and A_1, A_2 in pF/m:
        A_1 = 4.409*tanh(0.55*(h_u/W_i)^0.45),
        A_2 = 9.92 *tanh(0.52*(h_u/W_i)^0.5).
    The meter convention reproduces the bundled reference value of 1.2 pF
    for the 5.6 mm, 14-finger layout; see data/table1.cfg.
    """
    if g.w_i <= 0:
        raise InvalidInputError("finger width must be > 0")
    a1, a2 = _interdigital_coefficients(g)
    bracket = (g.n_fingers - 3) * a1 + a2
    c_pf = (eps_eff + 1.0) * g.l_i * bracket
    return c_pf * 1e-12


def extract_circuit(
    g: GeometrySpec,
    mut: MutPermittivity,
    inductors: dict | None = None,
    *,
    eps_form: str = "standard",
    dl_form: str = "as_printed",
) -> CircuitValues:
    """Assemble the cell's six lumped elements for a given MUT.

    The four capacitances come from the closed forms above; L and L_c are
    caller inputs (reference values by default) since the MUT does not move
    them.  Deterministic: identical inputs give bit-identical outputs.
    """
    ind = dict(DEFAULT_INDUCTORS)
    if inductors:
        ind.update(inductors)
    plates = plate_capacitances(g, mut, eps_form=eps_form, dl_form=dl_form)
    eps_eff = effective_permittivity(g, mut, form=eps_form)
    c_i = interdigital_capacitance(g, eps_eff)
    return CircuitValues(
        L=ind["L"],
        C_i=c_i,
        C_u=plates["C_u"],
        C_d=plates["C_d"],
        C_c=csr_capacitance(g),
        L_c=ind["L_c"],
    )


def geometry_hash(g: GeometrySpec) -> str:
    """Stable short hash of every geometry field (for report metadata)."""
    parts = [
        f"{name}={getattr(g, name)!r}"
        for name in sorted(g.__dataclass_fields__)
    ]
    return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]
