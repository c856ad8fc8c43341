import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from dps_sense.configfile import bundled_data_path, load_geometry
from dps_sense.dps import REFERENCE_CIRCUIT


@pytest.fixture(scope="session")
def geometry():
    return load_geometry(bundled_data_path("table1.cfg"))


@pytest.fixture(scope="session")
def reference_circuit():
    return REFERENCE_CIRCUIT


# Excitation tone used by the sensing tests: inside the extracted circuit's
# propagating band for every calibration-curve permittivity (the numeric
# band differs from the reference hardware's, so the data-sheet 114 MHz
# default would sit in this model's stopband).
F_EXC_TEST = 430e6


@pytest.fixture(scope="session")
def f_exc():
    return F_EXC_TEST
