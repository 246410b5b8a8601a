import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from impa_synth import ac
from impa_synth.chebyshev import prototype_lookup
from impa_synth.snail import SnailParams
from impa_synth.synthesis import DesignSpec, band_edges_from_w, synthesize_detailed

DATA = Path(__file__).parent / "data"

F0 = 6.5e9
W = 0.5 / 6.5
L_J = 40e-12
C1 = 5.25e-12
Z2 = 12.7


@pytest.fixture(scope="session")
def reference_snail():
    return SnailParams(L_J, 0.25, 3)


@pytest.fixture(scope="session")
def reference_spec(reference_snail):
    return DesignSpec(
        f0=F0, w=W, prototype=prototype_lookup(2, 20.0, 0.5), snail=reference_snail, c1_shunt=C1, z2=Z2
    )


@pytest.fixture(scope="session")
def reference_synthesis(reference_spec):
    return synthesize_detailed(reference_spec)


@pytest.fixture(scope="session")
def reference_band():
    return band_edges_from_w(F0, W)


@pytest.fixture(scope="session")
def calibrated(reference_synthesis, reference_band):
    r = ac.calibrate_negative_resistance(reference_synthesis.netlist, F0, 15.0, reference_band)
    return reference_synthesis.netlist.with_resistance(r)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
