import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from impa_synth.chebyshev import (
    TABLE_ENV_VAR,
    PrototypeSpec,
    RippleConstant,
    chebyshev_t,
    load_table,
    lowpass_frequency,
    power_loss,
    prototype_gain,
    prototype_lookup,
    ripple_constant_from_spec,
)
from impa_synth.errors import TableMissError


def test_t2_examples():
    assert chebyshev_t(2, 1.0) == 1.0
    assert chebyshev_t(2, 0.0) == -1.0


def test_t5_cosine_identity():
    assert chebyshev_t(5, math.cos(0.3)) == pytest.approx(math.cos(1.5), abs=1e-12)


def test_low_degrees():
    x = np.linspace(-2, 2, 9)
    np.testing.assert_array_equal(chebyshev_t(0, x), np.ones_like(x))
    np.testing.assert_array_equal(chebyshev_t(1, x), x)
    with pytest.raises(ValueError):
        chebyshev_t(-1, 0.5)


@given(st.floats(-3, 3))
def test_t2_closed_form(x):
    assert chebyshev_t(2, x) == pytest.approx(2 * x * x - 1, abs=1e-12)


def test_recurrence_and_bound():
    x = np.linspace(-1, 1, 2001)
    for n in range(1, 12):
        lhs = chebyshev_t(n + 1, x)
        rhs = 2 * x * chebyshev_t(n, x) - chebyshev_t(n - 1, x)
        assert np.max(np.abs(lhs - rhs)) < 1e-12
        assert np.max(np.abs(chebyshev_t(n, x))) <= 1 + 1e-12


@given(n=st.integers(1, 8), x=st.floats(1.0001, 5.0), sign=st.sampled_from([-1, 1]))
def test_grows_outside_unit_interval(n, x, sign):
    assert abs(chebyshev_t(n, sign * x)) > 1


class TestPowerLoss:
    def test_examples(self):
        assert power_loss(0.1, 2, 1 / math.sqrt(2)) == pytest.approx(1.0, abs=1e-15)
        assert power_loss(0.1, 2, 1.0) == pytest.approx(1.01, rel=1e-14)
        assert power_loss(RippleConstant(0.1), 2, 0.0) == pytest.approx(1.01, rel=1e-14)

    @given(k=st.floats(1e-3, 10), n=st.integers(0, 6), x=st.floats(-3, 3))
    def test_at_least_one(self, k, n, x):
        assert power_loss(k, n, x) >= 1.0

    def test_equality_at_zeros(self):
        for n in (1, 2, 3, 5):
            zeros = np.cos((2 * np.arange(n) + 1) * np.pi / (2 * n))
            np.testing.assert_allclose(power_loss(0.3, n, zeros), 1.0, atol=1e-15)

    def test_prototype_gain_at_ripple_peaks(self):
        k = ripple_constant_from_spec(20.0, 0.5)
        # T_2^2 = 1 at omega = 0 and omega = 1: gain is the minimum, 20 dB
        for x in (0.0, 1.0):
            assert 10 * math.log10(prototype_gain(k, 2, x)) == pytest.approx(20.0, abs=1e-12)


class TestRippleConstant:
    def test_twenty_db(self):
        k = ripple_constant_from_spec(20.0, 0.5)
        assert k.k**2 == pytest.approx(1 / 99, rel=1e-12)
        assert k.k == pytest.approx(0.100504, abs=1e-6)

    def test_three_db(self):
        assert ripple_constant_from_spec(10 * math.log10(2), 0.5).k == pytest.approx(1.0, rel=1e-12)
        assert ripple_constant_from_spec(3.0103, 0.5).k == pytest.approx(1.0, abs=1e-5)

    def test_monotone_decrease(self):
        ks = [ripple_constant_from_spec(g, 0.5).k for g in np.linspace(1, 80, 200)]
        assert np.all(np.diff(ks) < 0)

    @pytest.mark.parametrize("g_min,ripple", [(0.0, 0.5), (-3, 0.5), (20, 0.0)])
    def test_domain(self, g_min, ripple):
        with pytest.raises(ValueError):
            ripple_constant_from_spec(g_min, ripple)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            RippleConstant(0.0)


def test_lowpass_mapping():
    f0, w = 6.5e9, 0.5 / 6.5
    assert lowpass_frequency(f0, f0, w) == 0.0
    r = math.sqrt(1 + w * w / 4)
    f1, f2 = f0 * (r - w / 2), f0 * (r + w / 2)
    assert lowpass_frequency(f2, f0, w) == pytest.approx(1.0, rel=1e-12)
    assert lowpass_frequency(f1, f0, w) == pytest.approx(-1.0, rel=1e-12)


class TestTable:
    def test_reference_row(self):
        p = prototype_lookup(2, 20.0, 0.5)
        assert p.g == (0.5, 0.24, 1.22)
        assert p.coefficient(0) == 1.0 and p.coefficient(3) == 1.22

    def test_round_trip(self):
        p = prototype_lookup(2, 20.0, 0.5)
        assert PrototypeSpec.from_dict(json.loads(json.dumps(p.to_dict()))) == p

    def test_miss_names_neighbours(self):
        with pytest.raises(TableMissError, match=r"N=2, 20 dB, 0\.5 dB"):
            prototype_lookup(7, 20.0, 0.5)

    @pytest.mark.parametrize("kw", [
        dict(order_n=2, g_min_db=20, ripple_db=0.5, g=(0.5, 0.24)),
        dict(order_n=2, g_min_db=20, ripple_db=0.5, g=(0.5, -0.24, 1.2)),
        dict(order_n=0, g_min_db=20, ripple_db=0.5, g=(1.0,)),
        dict(order_n=2, g_min_db=20, ripple_db=0.0, g=(0.5, 0.24, 1.22)),
    ])
    def test_invalid_specs(self, kw):
        with pytest.raises(ValueError):
            PrototypeSpec(**kw)

    def test_user_table_from_env(self, tmp_path, monkeypatch):
        table = tmp_path / "t.json"
        table.write_text(json.dumps([{"order": 3, "g_min_db": 20, "ripple_db": 0.1, "g": [1, 2, 3, 4]}]))
        monkeypatch.setenv(TABLE_ENV_VAR, str(table))
        assert prototype_lookup(3, 20, 0.1).g == (1.0, 2.0, 3.0, 4.0)
        assert prototype_lookup(2, 20, 0.5).g == (0.5, 0.24, 1.22)
        assert len(load_table()) == 2

    def test_user_table_overrides(self, tmp_path):
        table = tmp_path / "t.json"
        table.write_text(json.dumps([{"order": 2, "g_min_db": 20, "ripple_db": 0.5, "g": [1, 1, 1]}]))
        assert prototype_lookup(2, 20, 0.5, table=load_table(table)).g == (1.0, 1.0, 1.0)
