"""Independent duplicate evaluations of every closed form in the package.

Each function here is written directly from the source expressions in a
different algebraic arrangement (and for the ill-conditioned lower-cutoff
radical, in 50-digit arithmetic), so a transcription error in the package
cannot cancel against an identical error here.  The formula-fidelity suite
compares the two implementations on random, well-conditioned inputs.
"""

from __future__ import annotations

import cmath
import math

import mpmath

EPS0 = 8.854_187_8128e-12


# --- phase-shifter branch immittances and dispersion ---

def series_impedance(L: float, c_i: complex, f: float) -> complex:
    w = 2.0 * math.pi * f
    return 1j * (w * L / 2.0) - 1j / (2.0 * w * c_i)


def shunt_admittance(l_c: float, c_c: float, c_u: complex, c_d: float, f: float) -> complex:
    w = 2.0 * math.pi * f
    c_t = c_u + c_d
    x = w * w * l_c
    return (1j * w * c_t) * (1.0 - x * c_c) / (1.0 - x * (c_c + c_t))


def cos_beta_l(z: complex, y: complex) -> complex:
    return 1.0 + 0.5 * z * y


def characteristic_impedance(z: complex, y: complex) -> complex:
    # (Z/2)*(Z/2 + 2/Y) expanded to (Z/2)^2 + Z/Y
    zc = cmath.sqrt((z / 2.0) ** 2 + z / y + 0j)
    return -zc if zc.real < 0 else zc


def upper_cutoff(L: float, c_i: float) -> float:
    return 1.0 / (2.0 * math.pi * math.sqrt(L * c_i))


def lower_cutoff(L: float, c_i: float, c_t: float, l_c: float, c_c: float) -> float:
    """50-digit evaluation of sqrt(b - sqrt(b^2 - 4ac)) / (2*pi*sqrt(2a))."""
    with mpmath.workdps(50):
        a = mpmath.mpf(c_t) * mpmath.mpf(L) * mpmath.mpf(l_c) * mpmath.mpf(c_c) * mpmath.mpf(c_i)
        b = (mpmath.mpf(c_t) * mpmath.mpf(L) * mpmath.mpf(c_i)
             + 8 * mpmath.mpf(c_i) * mpmath.mpf(l_c) * (mpmath.mpf(c_c) + mpmath.mpf(c_t))
             + mpmath.mpf(l_c) * mpmath.mpf(c_c))
        c = 8 * mpmath.mpf(c_i) + mpmath.mpf(c_t)
        disc = b * b - 4 * a * c
        if disc < 0:
            raise ValueError("negative discriminant")
        val = mpmath.sqrt(b - mpmath.sqrt(disc)) / (2 * mpmath.pi * mpmath.sqrt(2 * a))
        return float(val)


def series_branch_zero() -> float:
    # the series branch blocks only at DC
    return 0.0


def shunt_branch_pole(l_c: float, c_c: float, c_t: float) -> float:
    return 1.0 / (2.0 * math.pi * math.sqrt(l_c * (c_c + c_t)))


# --- geometry closed forms ---

def csr_capacitance(eps_r: float, t_m: float, s_c: float, turn_lengths) -> float:
    scale = EPS0 * 0.5 * (eps_r + 1.0)
    recip = [
        1.0 / (scale * (p * t_m / s_c + 2.0 * math.pi * t_m / math.log(8.0 * t_m / p)))
        for p in turn_lengths
    ]
    return 1.0 / math.fsum(recip)


def effective_permittivity(eps_r: float, eps_m: complex, h_u: float, a: float,
                           form: str = "standard") -> complex:
    radical = math.sqrt(1.0 + 12.0 * h_u / a)
    f_term = radical if form == "as_printed" else 1.0 / radical
    return 0.5 * ((eps_r + eps_m) + (eps_r - eps_m) * f_term)


def length_increment(h_u: float, a: float, eps_eff: float,
                     form: str = "as_printed") -> float:
    second = (h_u + 0.3) if form == "as_printed" else (a / h_u + 0.264)
    return (0.412 * h_u * (eps_eff + 0.3) * second
            / ((eps_eff - 0.258) * (a / h_u + 0.8)))


def plate_capacitance_bottom(eps_r: float, area: float, h_d: float) -> float:
    return EPS0 * eps_r * area / h_d


def plate_capacitance_top(eps_r: float, a: float, b_len: float, d_l: float,
                          h_u: float, eps_eff: complex) -> complex:
    area_grown = a * b_len + 2.0 * a * d_l
    c_real = EPS0 * eps_r * area_grown / h_u
    tan_eff = -eps_eff.imag / eps_eff.real
    return c_real - 1j * (c_real * tan_eff)


def interdigital_capacitance(eps_eff: complex, l_i: float, h_u: float,
                             w_i: float, n_fingers: int) -> complex:
    r = h_u / w_i
    a1 = 4.409 * math.tanh(0.55 * math.pow(r, 0.45))
    a2 = 9.92 * math.tanh(0.52 * math.sqrt(r))
    return (eps_eff + 1.0) * l_i * ((n_fingers - 3) * a1 + a2) * 1e-12


# --- soil calibration arithmetic ---

def two_channel_sum(t1: float, t2: float) -> float:
    # chain-rule assembly, summed in the opposite order
    return t2 + t1


def vwc_from_weights(w_dry: float, w_water: float) -> float:
    return w_water / (w_dry + w_water) * 100.0


def estimation_error(eps_meas: float, eps_nominal: float) -> float:
    return 100.0 * abs(eps_meas - eps_nominal) / eps_nominal
