import math

import numpy as np
import pytest

import oracles
from dps_sense.dps import (
    CircuitValues,
    REFERENCE_CIRCUIT,
    admittance_pole_frequency,
    admittance_zero_frequency,
    band_edges_closed_form,
    band_edges_numeric,
    default_band_search_grid,
    dispersion,
    dual_band_report,
    s_parameters,
    series_impedance,
    series_zero_frequency,
    shunt_admittance,
)
from dps_sense.errors import (
    ClosedFormInapplicableError,
    InvalidInputError,
    PoleProximityError,
)

C2 = REFERENCE_CIRCUIT

# Frozen from a dense-grid + bisection run (1 kHz edge resolution).
REF_BAND1 = (312_182_249.0, 434_519_215.0)
REF_BAND2_LO = 3_751_317_657.0
EXPECTED_POLE_HZ = 197_383_119.437  # 1/(2*pi*sqrt(L_c*(C_c + C_u + C_d)))


class TestCircuitValues:
    def test_rejects_nonpositive_real_part(self):
        with pytest.raises(InvalidInputError):
            CircuitValues(L=-1e-9, C_i=1e-12, C_u=1e-12, C_d=1e-12, C_c=1e-12, L_c=1e-9)

    def test_rejects_positive_loss_imaginary(self):
        with pytest.raises(InvalidInputError):
            CircuitValues(L=1e-9, C_i=1e-12 + 1e-13j, C_u=1e-12, C_d=1e-12,
                          C_c=1e-12, L_c=1e-9)

    def test_rejects_complex_isolated_elements(self):
        with pytest.raises(InvalidInputError):
            CircuitValues(L=1e-9, C_i=1e-12, C_u=1e-12, C_d=1e-12 - 1e-13j,
                          C_c=1e-12, L_c=1e-9)


class TestSeriesImpedance:
    def test_zero_at_resonance(self):
        f0 = series_zero_frequency(C2)
        assert abs(series_impedance(C2, f0)) < 1e-6

    def test_value_at_114_mhz(self):
        want = oracles.series_impedance(C2.L, C2.C_i, 114e6)
        got = series_impedance(C2, 114e6)
        assert got == pytest.approx(want, rel=1e-12)
        # reactance is capacitive and large: ~ j(0.537 - 581.7) ohms
        assert got.real == pytest.approx(0.0, abs=1e-12)
        assert got.imag == pytest.approx(0.537 - 581.7, abs=0.5)

    def test_diverges_toward_dc(self):
        lo = abs(series_impedance(C2, 1e3))
        hi = abs(series_impedance(C2, 1e2))
        assert hi > lo > 1e5  # capacitive 1/f growth: the series zero sits at DC

    def test_rejects_nonpositive_frequency(self):
        with pytest.raises(InvalidInputError):
            series_impedance(C2, 0.0)


class TestShuntAdmittance:
    def test_vanishes_toward_dc(self):
        assert abs(shunt_admittance(C2, 1.0)) < 1e-9

    def test_zero_frequency(self):
        f0 = admittance_zero_frequency(C2)
        assert f0 == pytest.approx(434.5e6, rel=1e-3)
        assert abs(shunt_admittance(C2, f0)) < 1e-12

    def test_pole_frequency_value(self):
        want = oracles.shunt_branch_pole(C2.L_c, C2.C_c, complex(C2.C_t).real)
        assert admittance_pole_frequency(C2) == pytest.approx(want, rel=1e-12)
        assert admittance_pole_frequency(C2) == pytest.approx(EXPECTED_POLE_HZ, rel=1e-9)

    def test_matches_oracle_on_grid(self):
        for f in np.geomspace(1e6, 5e9, 101):
            if abs(f - admittance_pole_frequency(C2)) < 1e5:
                continue
            want = oracles.shunt_admittance(C2.L_c, C2.C_c, C2.C_u, C2.C_d, f)
            assert shunt_admittance(C2, f) == pytest.approx(want, rel=1e-12)

    def test_pole_proximity_refused(self):
        f_pole = admittance_pole_frequency(C2)
        with pytest.raises(PoleProximityError):
            shunt_admittance(C2, f_pole)


class TestDispersion:
    def test_beta_l_zero_where_series_impedance_vanishes(self):
        f0 = series_zero_frequency(C2)
        pt = dispersion(C2, f0)
        assert abs(pt.beta_l) < 1e-6

    def test_passband_point_real_beta_and_impedance(self):
        f_mid = 0.5 * (REF_BAND1[0] + REF_BAND1[1])
        pt = dispersion(C2, f_mid)
        assert pt.propagating
        assert abs(pt.beta_l.imag) < 1e-9
        assert pt.z_c.imag == pytest.approx(0.0, abs=1e-9)
        assert pt.z_c.real > 0

    def test_stopband_point_not_propagating(self):
        pt = dispersion(C2, 150e6)
        assert not pt.propagating

    def test_decaying_branch(self):
        pt = dispersion(C2, 150e6)
        assert pt.beta_l.imag <= 0

    def test_matches_oracle(self):
        for f in (320e6, 380e6, 430e6, 2e9):
            z = oracles.series_impedance(C2.L, C2.C_i, f)
            y = oracles.shunt_admittance(C2.L_c, C2.C_c, C2.C_u, C2.C_d, f)
            pt = dispersion(C2, f)
            want = oracles.cos_beta_l(z, y)
            assert complex(np.cos(pt.beta_l)) == pytest.approx(want, rel=1e-9)
            assert pt.z_c == pytest.approx(
                oracles.characteristic_impedance(z, y), rel=1e-9
            )


class TestBandEdgesNumeric:
    def test_reference_circuit_bands(self):
        b = band_edges_numeric(C2)
        assert b.method == "numeric"
        assert len(b.bands) == 2
        assert b.f_cl == pytest.approx(REF_BAND1[0], abs=2e3)
        assert b.f_cu == pytest.approx(REF_BAND1[1], abs=2e3)
        assert b.bands[1][0] == pytest.approx(REF_BAND2_LO, abs=2e3)
        assert b.f_z1 == 0.0
        assert b.f_z2 == pytest.approx(EXPECTED_POLE_HZ, rel=1e-9)

    def test_zero_below_passband(self):
        b = band_edges_numeric(C2)
        assert b.f_z2 < b.f_cl

    def test_pole_drops_as_total_capacitance_grows(self):
        # doubling C_t scales the pole by sqrt((C_c+C_t)/(C_c+2*C_t))
        c_t = complex(C2.C_t).real
        doubled = CircuitValues(L=C2.L, C_i=C2.C_i, C_u=2 * complex(C2.C_u).real,
                                C_d=2 * C2.C_d, C_c=C2.C_c, L_c=C2.L_c)
        want = admittance_pole_frequency(C2) * math.sqrt(
            (C2.C_c + c_t) / (C2.C_c + 2 * c_t)
        )
        assert admittance_pole_frequency(doubled) == pytest.approx(want, rel=1e-12)

    def test_frequency_scaling_law(self):
        # L -> k*L and C -> k*C scales every characteristic frequency by 1/k
        k = 4.0
        scaled = CircuitValues(
            L=k * C2.L, C_i=k * complex(C2.C_i).real, C_u=k * complex(C2.C_u).real,
            C_d=k * C2.C_d, C_c=k * C2.C_c, L_c=k * C2.L_c,
        )
        b0 = band_edges_numeric(C2)
        b1 = band_edges_numeric(scaled)
        assert b1.f_cl == pytest.approx(b0.f_cl / k, rel=1e-4)
        assert b1.f_cu == pytest.approx(b0.f_cu / k, rel=1e-4)
        assert b1.f_z2 == pytest.approx(b0.f_z2 / k, rel=1e-12)

    def test_lossy_circuit_reports_empty_band(self):
        lossy = CircuitValues(L=C2.L, C_i=complex(C2.C_i).real - 0.3e-12j,
                              C_u=complex(C2.C_u).real - 4e-12j, C_d=C2.C_d,
                              C_c=C2.C_c, L_c=C2.L_c)
        b = band_edges_numeric(lossy)
        assert b.empty
        assert math.isnan(b.f_cl)

    def test_grid_span_enforced(self):
        with pytest.raises(InvalidInputError):
            band_edges_numeric(C2, np.linspace(50e6, 1e9, 20000))
        with pytest.raises(InvalidInputError):
            band_edges_numeric(C2, default_band_search_grid(100))


class TestBandEdgesClosedForm:
    def test_upper_cutoff(self):
        b = band_edges_closed_form(C2)
        want = oracles.upper_cutoff(C2.L, complex(C2.C_i).real)
        assert b.f_cu == pytest.approx(want, rel=1e-12)
        assert b.f_cu == pytest.approx(3.7513e9, rel=1e-4)

    def test_lower_cutoff_against_high_precision(self):
        b = band_edges_closed_form(C2)
        want = oracles.lower_cutoff(
            C2.L, complex(C2.C_i).real, complex(C2.C_t).real, C2.L_c, C2.C_c
        )
        assert b.f_cl == pytest.approx(want, rel=1e-12)

    def test_quadrupled_inductance_halves_upper_cutoff(self):
        quad = CircuitValues(L=4 * C2.L, C_i=C2.C_i, C_u=C2.C_u, C_d=C2.C_d,
                             C_c=C2.C_c, L_c=C2.L_c)
        assert band_edges_closed_form(quad).f_cu == pytest.approx(
            band_edges_closed_form(C2).f_cu / 2, rel=1e-12
        )

    def test_negative_discriminant_reported(self):
        # values arranged so b^2 < 4ac (possible because the printed middle
        # coefficient mixes units): a = 1e-10, b = 1.09e-4, c = 108
        weird = CircuitValues(L=1e-6, C_i=1.0, C_u=50.0, C_d=50.0, C_c=1e6,
                              L_c=1e-12)
        with pytest.raises(ClosedFormInapplicableError):
            band_edges_closed_form(weird)


class TestSweep:
    def test_lossless_unitarity(self):
        grid = np.linspace(1e6, 5e9, 4001)
        sw = s_parameters(C2, grid)
        ok = ~sw.masked
        power = np.abs(sw.s.s11[ok]) ** 2 + np.abs(sw.s.s21[ok]) ** 2
        assert np.max(np.abs(power - 1)) < 1e-6

    def test_deep_zero_near_pole(self):
        f_pole = admittance_pole_frequency(C2)
        sw = s_parameters(C2, np.array([f_pole - 1e3, f_pole + 1e3]))
        assert np.all(sw.s21_db() < -40.0)

    def test_in_band_transmission_low_half(self):
        # Derived from the sweep itself: the single-cell response stays
        # above -3 dB over the lower 40% of the numeric band; toward the
        # upper edge the image-impedance mismatch exceeds 3 dB, so the
        # 3 dB region is the contiguous low-side portion of the band.
        lo, hi = REF_BAND1
        grid = np.linspace(lo * 1.0001, hi * 0.9999, 2001)
        db = s_parameters(C2, grid).s21_db()
        frac = np.linspace(0, 1, grid.size)
        assert db[frac <= 0.40].min() > -3.0
        three_db = db >= -3.0
        assert three_db[0]
        assert np.all(np.diff(np.flatnonzero(three_db)) == 1)

    def test_band_consistency_with_five_cells(self):
        # In-band transmission beats stopband leakage outside a 5% guard
        # around every band edge once the cascade is long enough; rejection
        # grows with cell count (n=3 still lets the near-edge skirt exceed
        # the worst in-band mismatch ripple for this circuit).
        bands = band_edges_numeric(C2).bands
        grid = np.geomspace(1e6, 1e10, 20000)

        def split(n_cells):
            sw = s_parameters(C2, grid, n_cells=n_cells)
            mag = np.abs(sw.s.s21)
            in_band = np.zeros(grid.shape, bool)
            near_edge = np.zeros(grid.shape, bool)
            for lo, hi in bands:
                in_band |= (grid >= lo) & (grid <= hi)
                for edge in (lo, hi):
                    near_edge |= np.abs(grid - edge) <= 0.05 * edge
            ok = ~sw.masked & ~near_edge
            return mag[in_band & ok].min(), mag[~in_band & ok].max()

        min_in_3, max_out_3 = split(3)
        min_in_5, max_out_5 = split(5)
        assert min_in_5 >= max_out_5
        assert max_out_5 < max_out_3  # stopband rejection grows with cells

    def test_loss_reduces_transmission_monotonically(self):
        # in-band excitation; grow |Im(C_u)| and watch |s21| fall
        f_exc = 0.5 * (REF_BAND1[0] + REF_BAND1[1])
        mags = []
        for scale in (0.0, 0.01, 0.03, 0.1, 0.3):
            lossy = CircuitValues(
                L=C2.L, C_i=C2.C_i,
                C_u=complex(C2.C_u).real * (1 - 1j * scale),
                C_d=C2.C_d, C_c=C2.C_c, L_c=C2.L_c,
            )
            sw = s_parameters(lossy, np.array([f_exc]))
            mags.append(abs(sw.s.s21[0]))
        assert all(a > b for a, b in zip(mags, mags[1:]))

    def test_masked_points_flagged_not_dropped(self):
        f_pole = admittance_pole_frequency(C2)
        grid = np.array([f_pole / 2, f_pole, f_pole * 2])
        sw = s_parameters(C2, grid)
        assert sw.masked.tolist() == [False, True, False]
        assert sw.frequency_hz.size == 3
        assert np.isnan(sw.s.s21[1].real)

    def test_n_cells_validated(self):
        with pytest.raises(InvalidInputError):
            s_parameters(C2, np.array([1e8]), n_cells=0)

    def test_zero_placement_matches_pole(self):
        f_pole = admittance_pole_frequency(C2)
        grid = np.arange(f_pole - 2e6, f_pole + 2e6, 1e3)
        sw = s_parameters(C2, grid)
        mag = np.where(sw.masked, np.inf, np.abs(sw.s.s21))
        f_min = grid[int(np.argmin(mag))]
        assert abs(f_min - f_pole) <= 1e3


class TestDualBandReport:
    def test_report_structure_and_discrepancies(self):
        report = dual_band_report(C2)
        assert report["numeric"]["f_z2_hz"] == pytest.approx(EXPECTED_POLE_HZ, rel=1e-9)
        assert report["closed_form"]["f_cu_hz"] == pytest.approx(3.7513e9, rel=1e-4)
        ids = {d["id"] for d in report["discrepancies"]}
        assert "reported-zero-vs-model-pole" in ids
        assert "closed-form-coefficient-units" in ids
        zero_entry = next(
            d for d in report["discrepancies"] if d["id"] == "reported-zero-vs-model-pole"
        )
        assert zero_entry["reported_zero_hz"] == pytest.approx(103e6)
        assert zero_entry["model_pole_hz"] == pytest.approx(EXPECTED_POLE_HZ, rel=1e-9)
        assert report["disagreement"]["f_cu_ratio_closed_over_numeric"] > 1
