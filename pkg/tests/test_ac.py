import math
import time

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA, F0, W
from oracles import nodal_zin, reference_ladder, random_ladder, to_netlist
from impa_synth import ac
from impa_synth.errors import CalibrationError, EmptyBandError, PoleError, SingularElementError
from impa_synth.netlist import Netlist, PortTermination, SeriesCapacitor, ShuntParallelLC, ShuntResistor

Z0 = 50.0
R_REFERENCE = -33.7511148
# 15 dB crossings of the fixture curve, from the oracle solver at 1 kHz resolution
FIXTURE_CROSSINGS = (6134301958.736061, 6960975887.852131)


class TestElements:
    def test_series_capacitor(self):
        f = 1e9
        c = 1 / (2 * math.pi * f * 50)
        m = ac.abcd_of_element(SeriesCapacitor(c), f)
        assert m.b == pytest.approx(-50j, rel=1e-12)
        assert (m.a, m.c, m.d) == (1, 0, 1)

    def test_shunt_lc_at_resonance(self):
        lc = ShuntParallelLC(1e-9, 1e-12)
        m = ac.abcd_of_element(lc, lc.resonance)
        assert abs(m.c) < 1e-15
        assert (m.a, m.b, m.d) == (1, 0, 1)

    def test_shunt_resistor(self):
        assert ac.abcd_of_element(ShuntResistor(-100.0), 1e9).c == pytest.approx(-0.01)

    def test_singular(self):
        for e in (SeriesCapacitor(0.0), ShuntParallelLC(0.0, 1e-12), ShuntResistor(0.0)):
            with pytest.raises(SingularElementError):
                ac.abcd_of_element(e, 1e9)

    def test_port_is_not_an_element(self):
        with pytest.raises(TypeError):
            ac.abcd_of_element(PortTermination(50), 1e9)

    def test_nonpositive_frequency(self):
        with pytest.raises(ValueError):
            ac.abcd_of_element(SeriesCapacitor(1e-12), 0.0)


class TestCascade:
    def test_single(self):
        m = ac.abcd_of_element(SeriesCapacitor(1e-12), 1e9)
        assert ac.cascade([m]) == m

    def test_shunts_add(self):
        a = ac.abcd_of_element(ShuntResistor(100.0), 1e9)
        b = ac.abcd_of_element(ShuntResistor(-25.0), 1e9)
        assert ac.cascade([a, b]).c == pytest.approx(0.01 - 0.04)

    def test_empty(self):
        with pytest.raises(ValueError):
            ac.cascade([])

    @given(st.integers(0, 2**32 - 1))
    def test_reciprocity(self, seed):
        rng = np.random.default_rng(seed)
        els = random_ladder(rng, int(rng.integers(1, 7)), negative_r=True)
        net = to_netlist(els)
        f = np.linspace(1e9, 20e9, 11)
        for m in [ac.network_abcd(net, f)] + [ac.abcd_of_element(e, f) for e in net.elements[1:]]:
            # relative to the size of the products that cancel in ad - bc
            scale = np.maximum(1.0, np.abs(m.a * m.d) + np.abs(m.b * m.c))
            assert np.max(np.abs(m.det - 1) / scale) < 1e-10


class TestImpedanceAndReflection:
    def test_open_sentinel(self):
        lc = ShuntParallelLC(1e-9, 1e-12)
        net = Netlist((PortTermination(Z0), lc))
        assert ac.input_impedance(net, lc.resonance) == ac.OPEN
        assert ac.reflection(ac.OPEN, Z0) == 1.0
        net = Netlist((PortTermination(Z0), SeriesCapacitor(1e-12)))
        assert ac.input_impedance(net, 1e9) == ac.OPEN

    def test_single_resistor(self):
        net = Netlist((PortTermination(Z0), ShuntResistor(37.0)))
        assert ac.input_impedance(net, 1e9) == pytest.approx(37.0, rel=1e-15)

    def test_reflection_examples(self):
        assert ac.reflection(Z0, Z0) == 0
        g = ac.reflection(-3 * Z0, Z0)
        assert g == pytest.approx(2.0, rel=1e-15)
        assert 20 * math.log10(abs(g)) == pytest.approx(6.0206, abs=1e-4)

    def test_pole(self):
        with pytest.raises(PoleError):
            ac.reflection(-Z0, Z0)
        net = Netlist((PortTermination(Z0), ShuntResistor(-Z0)))
        resp = ac.sweep(net, 1e9, 2e9, 3)
        assert resp.poles.all()

    def test_reference_netlist_matches_oracle_at_f0(self, reference_synthesis):
        net = reference_synthesis.netlist.with_resistance(R_REFERENCE)
        z = ac.input_impedance(net, F0)
        oracle = nodal_zin(reference_ladder(R_REFERENCE), F0)
        assert abs(z - oracle) / abs(oracle) < 1e-9

    def test_oracle_equivalence_sweep(self):
        rng = np.random.default_rng(20261016)
        f = np.linspace(0.5e9, 15e9, 1001)
        for _ in range(10):
            els = random_ladder(rng, int(rng.integers(1, 7)), negative_r=True)
            z = ac.input_impedance(to_netlist(els), f)
            for fk, zk in zip(f, z):
                ref = nodal_zin(els, fk)
                if ref is None:
                    assert np.isinf(zk)
                else:
                    assert abs(zk - ref) <= 1e-9 * abs(ref)


class TestSweep:
    def test_lossless(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            net = to_netlist(random_ladder(rng, int(rng.integers(1, 7))))
            resp = ac.sweep(net, 0.5e9, 15e9, 1001)
            assert np.max(np.abs(np.abs(resp.gamma) - 1)) < 1e-9

    def test_flat_negative_resistor(self):
        net = Netlist((PortTermination(Z0), ShuntResistor(-3 * Z0)))
        resp = ac.sweep(net, 1e9, 2e9, 5)
        np.testing.assert_allclose(resp.gain_db, 20 * math.log10(2), atol=1e-12)

    def test_gain_identity(self, calibrated):
        resp = ac.sweep(calibrated, 5e9, 8e9, 501)
        np.testing.assert_allclose(resp.gain_db, 10 * np.log10(np.abs(resp.gamma) ** 2), atol=1e-12)

    def test_deterministic_and_order_independent(self, calibrated):
        f = np.linspace(5e9, 8e9, 301)
        a = ac.response(calibrated, f)
        b = ac.response(calibrated, f[::-1][::-1].copy())
        np.testing.assert_array_equal(a.gamma, b.gamma)
        pointwise = np.array([ac.response(calibrated, [x]).gamma[0] for x in f[::-1]])[::-1]
        np.testing.assert_allclose(pointwise, a.gamma, rtol=1e-13)

    @pytest.mark.parametrize("args", [(2e9, 1e9, 10), (1e9, 2e9, 1), (0.0, 1e9, 10)])
    def test_bad_grid(self, args):
        with pytest.raises(ValueError):
            ac.sweep(Netlist((PortTermination(Z0),)), *args)

    def test_two_point_grid(self):
        resp = ac.sweep(Netlist((PortTermination(Z0), ShuntResistor(10.0))), 1e9, 2e9, 2)
        assert len(resp.freqs) == 2


def _flat(gain_db, n=11):
    f = np.linspace(1e9, 2e9, n)
    return ac.FrequencyResponse.from_gamma(f, np.full(n, 10 ** (gain_db / 20), dtype=complex))


class TestBandReport:
    def test_flat_low(self):
        with pytest.raises(EmptyBandError):
            ac.band_report(_flat(6.0), 15.0)

    def test_flat_high(self):
        b = ac.band_report(_flat(16.0), 15.0)
        assert (b.f_low, b.f_high) == (1e9, 2e9)
        assert b.ripple_db == pytest.approx(0.0, abs=1e-12)

    def test_fixture_crossings(self):
        resp = ac.read_response_csv(DATA / "two_peak_fixture.csv")
        step = resp.freqs[1] - resp.freqs[0]
        b = ac.band_report(resp, 15.0)
        assert abs(b.f_low - FIXTURE_CROSSINGS[0]) < step
        assert abs(b.f_high - FIXTURE_CROSSINGS[1]) < step
        assert b.f_low < b.f_high and b.ripple_db >= 0
        assert len(ac.local_maxima(resp, b.f_low, b.f_high)) == 2

    def test_widest_run_wins(self):
        g = np.array([20, 20, 0, 20, 20, 20, 20, 0, 20], dtype=float)
        f = np.arange(1, 10, dtype=float)
        resp = ac.FrequencyResponse(f, 10 ** (g / 20) + 0j, g, np.zeros(9, bool))
        b = ac.band_report(resp, 15.0)
        assert 3 < b.f_low < 4 and 7 < b.f_high < 8


class TestStability:
    def test_passive_stable(self, reference_synthesis):
        assert ac.is_stable(reference_synthesis.netlist.with_resistance(50.0))

    def test_resistive(self):
        assert ac.is_stable(Netlist((PortTermination(Z0), ShuntResistor(-3 * Z0))))
        assert not ac.is_stable(Netlist((PortTermination(Z0), ShuntResistor(-Z0 / 2))))

    def test_threshold(self, reference_synthesis):
        net = reference_synthesis.netlist
        r_th = ac.oscillation_threshold(net, 1e8, 1e-4)
        assert r_th == pytest.approx(24.0242, rel=1e-4)
        assert ac.is_stable(net.with_resistance(-r_th * 1.001))
        assert not ac.is_stable(net.with_resistance(-r_th * 0.999))


class TestCalibration:
    def test_single_resistor(self):
        net = Netlist((PortTermination(Z0), ShuntResistor(None)))
        r = ac.calibrate_negative_resistance(net, 1e9, 20 * math.log10(2), (0.9e9, 1.1e9))
        assert r == pytest.approx(-3 * Z0, rel=1e-9)

    def test_reference(self, reference_synthesis, reference_band, calibrated):
        r = calibrated.elements[calibrated.resistor_index()].r
        assert r == pytest.approx(R_REFERENCE, rel=1e-7)
        assert ac.min_gain_in_band(calibrated, reference_band) == pytest.approx(15.0, abs=0.05)
        f = np.linspace(F0 * (1 - 1.5 * W), F0 * (1 + 1.5 * W), 2001)
        assert not ac.response(calibrated, f).poles.any()
        assert ac.is_stable(calibrated)
        # cross-check the calibrated minimum with the oracle solver
        fb = np.linspace(*reference_band, 2001)
        ladder = reference_ladder(r, reference_synthesis.op.l_s)
        oracle = min(20 * math.log10(abs((z - 50) / (z + 50))) for z in (nodal_zin(ladder, x) for x in fb))
        assert oracle == pytest.approx(15.0, abs=0.05)

    def test_unreachable(self, reference_synthesis, reference_band):
        with pytest.raises(CalibrationError) as err:
            ac.calibrate_negative_resistance(reference_synthesis.netlist, F0, 200.0, reference_band)
        assert 15 < err.value.achievable_db < 200

    def test_runtime(self, reference_synthesis, reference_band):
        t0 = time.perf_counter()
        ac.calibrate_negative_resistance(reference_synthesis.netlist, F0, 15.0, reference_band)
        assert time.perf_counter() - t0 < 5.0

    def test_monotone_instability(self, reference_synthesis, reference_band):
        net = reference_synthesis.netlist
        r_th = ac.oscillation_threshold(net, 1e8, 1e-4)
        rs = np.geomspace(1e4, r_th * (1 + 1e-6), 20)
        g = [ac.min_gain_in_band(net.with_resistance(-r), reference_band) for r in rs]
        assert np.all(np.diff(g) >= 0)

    def test_min_gain_peaks_before_threshold(self, reference_synthesis, reference_band):
        # Documented deviation: the in-band minimum is not monotone right at the threshold.
        net = reference_synthesis.netlist
        r_th = ac.oscillation_threshold(net, 1e8, 1e-4)
        rs = np.linspace(r_th * 1.00001, 32.0, 40)
        g = np.array([ac.min_gain_in_band(net.with_resistance(-r), reference_band) for r in rs])
        k = int(np.argmax(g))
        assert 0 < k < len(rs) - 1
        assert 26.5 < rs[k] < 28.5
        assert np.all(np.diff(g[k:]) < 0)

    def test_needs_placeholder(self):
        with pytest.raises(Exception, match="placeholder"):
            ac.calibrate_negative_resistance(Netlist((PortTermination(Z0),)), 1e9, 3.0, (0.9e9, 1.1e9))


class TestCsv:
    def test_round_trip(self, calibrated, tmp_path):
        resp = ac.sweep(calibrated, 6e9, 7e9, 101)
        path = tmp_path / "g.csv"
        ac.write_response_csv(resp, path)
        text = path.read_bytes()
        assert text.startswith(b"freq_hz,re_gamma,im_gamma,gain_db\n")
        assert b"\r" not in text
        back = ac.read_response_csv(path)
        np.testing.assert_array_equal(back.freqs, resp.freqs)
        np.testing.assert_array_equal(back.gamma, resp.gamma)
        np.testing.assert_array_equal(back.gain_db, resp.gain_db)

    def test_bad_header(self, tmp_path):
        p = tmp_path / "x.csv"
        p.write_text("a,b\n1,2\n")
        with pytest.raises(ValueError):
            ac.read_response_csv(p)
