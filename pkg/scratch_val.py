"""Scratch: chain rule, inversion, and pulse-study validation."""
import time
import numpy as np

from dps_sense.configfile import bundled_data_path, load_geometry
from dps_sense.sensitivity import dps_sensitivity, sensitivity_map, phase_response
from dps_sense.geometry import MutPermittivity
from dps_sense.soilcal import (
    DEFAULT_SAND_CURVE, DetectorReading, detector_encode, detector_decode,
    invert_permittivity, permittivity_from_vwc,
)
from dps_sense.dispersion import pulse_distortion_study, bundled_soil_models

g = load_geometry(bundled_data_path("table1.cfg"))
F_EXC = 430e6

print("=== chain rule ===")
rng = np.random.default_rng(7)
t0 = time.perf_counter()
worst = 0.0
for _ in range(20):
    eps = float(rng.uniform(2.0, 24.0))
    f = float(rng.uniform(420e6, 3.2e9))
    s, terms = dps_sensitivity(g, None, eps, f, return_terms=True)
    total = terms["C_u"] + terms["C_i"]
    rel = abs(total - s) / abs(s)
    worst = max(worst, rel)
    if rel > 0.01:
        print(f"  VIOLATION eps={eps:.2f} f={f/1e6:.1f} direct={s:.5f} chain={total:.5f} rel={rel:.4f}")
print(f"worst chain-rule rel error: {worst:.3e}  ({time.perf_counter()-t0:.2f}s)")

print("\n=== sensitivity at 430 MHz, eps 5/10/15/20 ===")
vals = [dps_sensitivity(g, None, e, F_EXC) for e in (5, 10, 15, 20)]
print(vals)
print("positive:", all(v > 0 for v in vals), "strictly decreasing:", all(a > b for a, b in zip(vals, vals[1:])))

print("\n=== sensitivity map ===")
t0 = time.perf_counter()
grid = np.linspace(395e6, 1200e6, 61)
smap = sensitivity_map(g, None, grid, (5.0, 10.0, 15.0, 20.0))
print("f_optimal:", smap.f_optimal / 1e6, "MHz; band:", [b / 1e6 for b in smap.band_hz])
lo, hi = smap.band_hz
print("in lowest quartile:", smap.f_optimal <= lo + 0.25 * (hi - lo), f"({time.perf_counter()-t0:.2f}s)")

print("\n=== inversion roundtrip (no quantization) ===")
t0 = time.perf_counter()
for vwc in (0.0, 15.0, 30.0):
    mut = permittivity_from_vwc(DEFAULT_SAND_CURVE, vwc)
    pr = phase_response(g, None, mut, F_EXC)
    reading = detector_encode(pr.delta_theta_deg, pr.loss_db)
    res = invert_permittivity(reading, g, None, F_EXC)
    print(f"vwc={vwc:5.1f}: eps=({res.eps.eps_real:.4f},{res.eps.eps_imag:.4f}) "
          f"true=({mut.eps_real},{mut.eps_imag}) vwc_hat={res.vwc_percent} "
          f"res={res.residual:.2e} it={res.iterations} conv={res.converged}")
print(f"({time.perf_counter()-t0:.2f}s for 3 inversions)")

print("\n=== inversion roundtrip (with quantization) ===")
t0 = time.perf_counter()
for vwc in (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0):
    mut = permittivity_from_vwc(DEFAULT_SAND_CURVE, vwc)
    pr = phase_response(g, None, mut, F_EXC)
    reading = detector_encode(pr.delta_theta_deg, pr.loss_db, quantize=True)
    res = invert_permittivity(reading, g, None, F_EXC)
    err = abs(res.vwc_percent - vwc) if res.vwc_percent is not None else float("nan")
    print(f"vwc={vwc:5.1f}: vwc_hat={res.vwc_percent:.4f} err={err:.4f} "
          f"eps=({res.eps.eps_real:.4f},{res.eps.eps_imag:.4f}) res={res.residual:.2e} it={res.iterations}")
print(f"({time.perf_counter()-t0:.2f}s for 7 inversions)")

print("\n=== debye fits ===")
for vwc, fit in bundled_soil_models().items():
    m = fit["model"]
    print(f"vwc={vwc}: eps_inf={m.eps_inf} delta={m.delta_eps[0]:.4f} tau={m.tau[0]:.4e} mismatch={fit['im_mismatch']:.2e}")

print("\n=== pulse study ===")
t0 = time.perf_counter()
study = pulse_distortion_study(g)
print(f"({time.perf_counter()-t0:.2f}s)")
print("delays:", {k: f"{v*1e9:.2f} ns" for k, v in study["delays_s"].items()})
pws = sorted({pw for pw, _ in study["nrmse"]})
vwcs = sorted(study["purity_db"])
print("nrmse matrix (rows pw, cols vwc):")
for pw in pws:
    print(f"  pw={pw*1e12:6.0f} ps: " + "  ".join(f"{study['nrmse'][(pw, v)]:.4f}" for v in vwcs))
print("purity:", {v: f"{study['purity_db'][v]:.1f} dB" for v in vwcs})
EOF_MARKER = None
