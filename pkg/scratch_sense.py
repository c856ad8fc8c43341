"""Scratch: sensitivity sign/shape and inversion feasibility."""
import numpy as np

from dps_sense.configfile import bundled_data_path, load_geometry
from dps_sense.dps import band_edges_numeric, band_edges_closed_form, s_parameters, unit_cell
from dps_sense.geometry import MutPermittivity, extract_circuit
from dps_sense.twoport import abcd_to_s

g = load_geometry(bundled_data_path("table1.cfg"))


def theta_loss(eps_re, eps_im, f):
    c = extract_circuit(g, MutPermittivity(eps_re, eps_im))
    sp = abcd_to_s(unit_cell(c, f), 50.0)
    return np.degrees(np.angle(sp.s21)), 20 * np.log10(abs(sp.s21))


def wrapped_delta(t2, t1):
    d = t2 - t1
    return (d + 180.0) % 360.0 - 180.0


def s_dps(eps, f, h=1e-3):
    tp, _ = theta_loss(eps + h, 0.0, f)
    tm, _ = theta_loss(eps - h, 0.0, f)
    return wrapped_delta(tp, tm) / (2 * h)

from dps_sense.dps import REFERENCE_CIRCUIT
print("stable closed-form f_cl:", band_edges_closed_form(REFERENCE_CIRCUIT).f_cl, "Hz")

# band of circuits at various eps
for e in (1, 5, 12, 24):
    c = extract_circuit(g, MutPermittivity(float(e), 0.0))
    b = band_edges_numeric(c)
    print(f"eps={e}: primary band {b.f_cl/1e6:.2f} .. {b.f_cu/1e6:.2f} MHz, pole {b.f_z2/1e6:.3f} MHz")

# sensitivity vs frequency for eps = 5, 10, 15, 20
fgrid = np.linspace(420e6, 3700e6, 20)
print("\nf (MHz) | S_dps at eps 5, 10, 15, 20")
for f in fgrid:
    row = [s_dps(e, f) for e in (5.0, 10.0, 15.0, 20.0)]
    print(f"{f/1e6:9.1f} | " + "  ".join(f"{v:+9.4f}" for v in row))

# zoom near lower edge
print("\nzoom near lower edge")
for f in np.linspace(412e6, 560e6, 16):
    row = [s_dps(e, f) for e in (5.0, 10.0, 15.0, 20.0)]
    print(f"{f/1e6:9.1f} | " + "  ".join(f"{v:+9.4f}" for v in row))

# phase and loss along the calibration curve at a candidate f_exc
knots = [(0, 2.5, 0.05), (5, 6, 0.5), (10, 8, 0.9), (15, 14.5, 1.8), (20, 18, 2.5), (25, 21, 3.1), (30, 23.5, 3.5)]
for f_exc in (430e6, 450e6, 500e6, 600e6):
    print(f"\ncurve walk at f_exc = {f_exc/1e6:.0f} MHz")
    for v, er, ei in knots:
        th, lo = theta_loss(er, ei, f_exc)
        print(f"  vwc={v:2d} eps=({er},{ei}): theta={th:+9.3f} deg  loss={lo:+8.3f} dB")
