"""Model-based toolkit for a dispersive phase-shifter soil-moisture sensor.

Submodules
----------
twoport      chain-matrix algebra and scattering conversion
dps          the shifter's equivalent circuit: dispersion, band edges, sweeps
geometry     lumped-element extraction from physical dimensions
sensitivity  phase sensitivity to the material permittivity
soilcal      calibration curve, detector model, permittivity/VWC inversion
dispersion   time-domain pulse-vs-sine propagation in dispersive soil
cli          the `dps-sense` command-line pipeline
"""

from .dps import (
    REFERENCE_CIRCUIT,
    BandStructure,
    CircuitValues,
    DispersionPoint,
    Sweep,
    band_edges_closed_form,
    band_edges_numeric,
    dispersion,
    s_parameters,
    series_impedance,
    shunt_admittance,
)
from .geometry import GeometrySpec, MutPermittivity, extract_circuit
from .twoport import (
    SParams,
    TwoPort,
    abcd_series,
    abcd_shunt,
    abcd_to_s,
    cascade,
    s_to_abcd,
    unwrap_phase,
)

__version__ = "0.1.0"

__all__ = [
    "REFERENCE_CIRCUIT",
    "BandStructure",
    "CircuitValues",
    "DispersionPoint",
    "GeometrySpec",
    "MutPermittivity",
    "SParams",
    "Sweep",
    "TwoPort",
    "abcd_series",
    "abcd_shunt",
    "abcd_to_s",
    "band_edges_closed_form",
    "band_edges_numeric",
    "cascade",
    "dispersion",
    "extract_circuit",
    "s_parameters",
    "s_to_abcd",
    "series_impedance",
    "shunt_admittance",
    "unwrap_phase",
]
