"""Scratch numeric exploration (not part of the package)."""
import numpy as np

from dps_sense.configfile import bundled_data_path, load_geometry
from dps_sense.dps import (
    REFERENCE_CIRCUIT, admittance_pole_frequency, admittance_zero_frequency,
    band_edges_closed_form, band_edges_numeric, s_parameters, series_zero_frequency,
    dual_band_report,
)
from dps_sense.geometry import (
    MutPermittivity, UNLOADED_MUT, csr_capacitance, effective_permittivity,
    effective_length_increment, extract_circuit, interdigital_capacitance,
    plate_capacitances,
)

c2 = REFERENCE_CIRCUIT
print("=== reference circuit ===")
print("series zero (f_cu closed):", series_zero_frequency(c2) / 1e6, "MHz")
print("Y zero:", admittance_zero_frequency(c2) / 1e6, "MHz")
print("Y pole (f_z2):", admittance_pole_frequency(c2) / 1e6, "MHz")
bn = band_edges_numeric(c2)
print("numeric bands:", [(lo / 1e6, hi / 1e6) for lo, hi in bn.bands])
bc = band_edges_closed_form(c2)
print("closed form f_cl, f_cu:", bc.f_cl, bc.f_cu / 1e9, "GHz")

# in-band |s21| for n=1 and n=3
f_cl, f_cu = bn.f_cl, bn.f_cu
grid = np.linspace(f_cl * 1.0001, f_cu * 0.9999, 2001)
sw = s_parameters(c2, grid)
db = sw.s21_db()
print("in-band min/max s21 dB (n=1):", db.min(), db.max())
frac = np.linspace(0, 1, 2001)
for lim in (0.4, 0.5, 0.6, 0.75):
    sel = frac <= lim
    print(f"  min dB over lower {lim:.0%}:", db[sel].min())
# unitarity
u = np.abs(sw.s.s11) ** 2 + np.abs(sw.s.s21) ** 2
print("unitarity max dev:", np.abs(u - 1).max())
# zero depth
fz = admittance_pole_frequency(c2)
for off in (1e3, -1e3):
    swz = s_parameters(c2, np.array([fz + off]))
    print(f"s21 dB at pole{off:+ated.0f}" if False else f"s21 dB at pole {off:+.0f} Hz:", swz.s21_db()[0])

print()
print("=== geometry extraction (unloaded) ===")
g = load_geometry(bundled_data_path("table1.cfg"))
print("thick_mut:", g.thick_mut)
print("turn lengths (mm):", [p * 1e3 for p in g.csr_turn_lengths])
cc = csr_capacitance(g)
print("C_c:", cc * 1e12, "pF  (ref 7.8)")
eps_eff_u = effective_permittivity(g, UNLOADED_MUT)
print("eps_eff unloaded:", eps_eff_u)
for form in ("as_printed", "standard"):
    dl = effective_length_increment(g, eps_eff_u.real, form=form)
    print(f"dL {form}: {dl*1e6:.3f} um")
pl = plate_capacitances(g, UNLOADED_MUT)
print("C_d:", pl["C_d"] * 1e12, "pF (ref 15.9); C_u:", pl["C_u"] * 1e12, "pF (ref 14.1)")
ci = interdigital_capacitance(g, eps_eff_u)
print("C_i:", ci * 1e12, "pF (ref 1.2)")

c_ext = extract_circuit(g, UNLOADED_MUT)
print("extracted circuit:", c_ext)
print("pole f_z2:", admittance_pole_frequency(c_ext) / 1e6, "MHz")
bn_ext = band_edges_numeric(c_ext)
print("numeric bands:", [(lo / 1e6, hi / 1e6) for lo, hi in bn_ext.bands])

# dL across eps 1..24 for both forms
eps_grid = np.linspace(1, 24, 24)
for form in ("as_printed", "standard"):
    vals = []
    for e in eps_grid:
        ee = effective_permittivity(g, MutPermittivity(e, 0.0))
        vals.append(effective_length_increment(g, ee.real, form=form) * 1e6)
    print(f"dL {form}: min {min(vals):.3f} max {max(vals):.3f} um; first {vals[0]:.3f} last {vals[-1]:.3f}")

# C_u and C_i variation over eps 1..24
cu_vals, ci_vals = [], []
for e in eps_grid:
    cx = extract_circuit(g, MutPermittivity(e, 0.0))
    cu_vals.append(complex(cx.C_u).real * 1e12)
    ci_vals.append(complex(cx.C_i).real * 1e12)
print("C_u span pF:", max(cu_vals) - min(cu_vals), " C_i span pF:", max(ci_vals) - min(ci_vals))
