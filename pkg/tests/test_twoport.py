import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dps_sense.errors import InvalidInputError, SingularNetworkError
from dps_sense.twoport import (
    TwoPort,
    abcd_series,
    abcd_shunt,
    abcd_to_s,
    cascade,
    s_to_abcd,
    unwrap_phase,
    validate_frequency_grid,
)


class TestPrimitives:
    def test_zero_series_is_identity(self):
        net = abcd_series(0j)
        assert net.a == 1 and net.d == 1 and net.b == 0 and net.c == 0

    def test_series_definition(self):
        net = abcd_series(100j)
        assert net.b == 100j and net.a == 1 and net.d == 1 and net.c == 0

    def test_open_shunt_is_identity(self):
        net = abcd_shunt(0j)
        assert net.a == 1 and net.d == 1 and net.b == 0 and net.c == 0

    def test_shunt_definition(self):
        net = abcd_shunt(0.02j)
        assert net.c == 0.02j and net.b == 0

    def test_series_impedances_add_under_cascade(self):
        z1, z2 = 3 + 4j, -7 + 2j
        combined = cascade(abcd_series(z1), abcd_series(z2))
        expected = abcd_series(z1 + z2)
        assert combined.b == pytest.approx(expected.b)
        assert combined.a == pytest.approx(1)

    def test_shunt_admittances_add_under_cascade(self):
        y1, y2 = 0.01j, 0.5 - 0.2j
        combined = cascade(abcd_shunt(y1), abcd_shunt(y2))
        assert combined.c == pytest.approx(y1 + y2)

    def test_nonfinite_rejected(self):
        with pytest.raises(InvalidInputError):
            abcd_series(complex("inf"))
        with pytest.raises(InvalidInputError):
            abcd_shunt(complex("nan"))


class TestCascade:
    def test_identity_law(self):
        m = cascade(abcd_series(5j), abcd_shunt(0.1j))
        out = cascade(TwoPort.identity(), m)
        for name in "abcd":
            assert getattr(out, name) == pytest.approx(getattr(m, name))

    def test_three_element_determinant(self):
        net = cascade(abcd_series(50), abcd_shunt(0.02), abcd_series(50))
        assert abs(net.determinant - 1) < 1e-9
        assert net.is_reciprocal()

    def test_associativity(self):
        a, b, c = abcd_series(3j), abcd_shunt(0.07j), abcd_series(-11j)
        left = cascade(cascade(a, b), c)
        right = cascade(a, cascade(b, c))
        for name in "abcd":
            assert getattr(left, name) == pytest.approx(getattr(right, name), abs=1e-12)


@st.composite
def lossless_ladder(draw):
    """Random cascade of purely reactive series/shunt primitives."""
    n = draw(st.integers(min_value=1, max_value=6))
    nets = []
    for _ in range(n):
        x = draw(st.floats(min_value=-500, max_value=500,
                           allow_nan=False, allow_infinity=False))
        if draw(st.booleans()):
            nets.append(abcd_series(1j * x))
        else:
            nets.append(abcd_shunt(1j * x / 2500.0))
    net = nets[0]
    for m in nets[1:]:
        net = cascade(net, m)
    return net


class TestConversion:
    def test_identity_is_matched_through(self):
        sp = abcd_to_s(TwoPort.identity(), 50.0)
        assert sp.s21 == pytest.approx(1)
        assert sp.s11 == pytest.approx(0)

    def test_series_50_in_50(self):
        sp = abcd_to_s(abcd_series(50.0 + 0j), 50.0)
        assert sp.s21 == pytest.approx(oracle_series_50()[0], rel=1e-12)
        assert sp.s11 == pytest.approx(oracle_series_50()[1], rel=1e-12)

    def test_shunt_50_in_50(self):
        sp = abcd_to_s(abcd_shunt(1 / 50 + 0j), 50.0)
        s21, s11 = oracle_shunt_50()
        assert sp.s21 == pytest.approx(s21, rel=1e-12)
        assert sp.s11 == pytest.approx(s11, rel=1e-12)

    def test_bad_z0(self):
        with pytest.raises(InvalidInputError):
            abcd_to_s(TwoPort.identity(), 0.0)

    def test_singular_network(self):
        # a = d = 1, b = -2*z0, c = 0 makes the denominator vanish
        with pytest.raises(SingularNetworkError):
            abcd_to_s(TwoPort(1.0 + 0j, -100.0 + 0j, 0j, 1.0 + 0j), 50.0)

    @settings(max_examples=200, deadline=None)
    @given(lossless_ladder())
    def test_determinant_one_for_ladders(self, net):
        assert abs(net.determinant - 1) <= 1e-9

    @settings(max_examples=200, deadline=None)
    @given(lossless_ladder())
    def test_lossless_unitarity(self, net):
        try:
            sp = abcd_to_s(net, 50.0)
        except SingularNetworkError:
            return
        power = abs(sp.s11) ** 2 + abs(sp.s21) ** 2
        assert power <= 1 + 1e-9
        assert power == pytest.approx(1, abs=1e-6)

    @settings(max_examples=200, deadline=None)
    @given(lossless_ladder())
    def test_reciprocity_s12_equals_s21(self, net):
        try:
            sp = abcd_to_s(net, 50.0)
        except SingularNetworkError:
            return
        assert sp.s12 == pytest.approx(sp.s21, abs=1e-9)

    def test_roundtrip_on_random_passive_networks(self):
        rng = np.random.default_rng(42)
        for _ in range(1000):
            parts = []
            for _ in range(rng.integers(1, 5)):
                z = complex(rng.uniform(0, 100), rng.uniform(-300, 300))
                y = complex(rng.uniform(0, 0.05), rng.uniform(-0.1, 0.1))
                parts += [abcd_series(z), abcd_shunt(y)]
            net = parts[0]
            for m in parts[1:]:
                net = cascade(net, m)
            sp = abcd_to_s(net, 50.0)
            back = s_to_abcd(sp)
            for name in "abcd":
                got, want = getattr(back, name), getattr(net, name)
                assert abs(got - want) <= 1e-9 * max(1.0, abs(want))


def oracle_series_50():
    # symbolic conversion with a = d = 1, b = 50, c = 0 at z0 = 50:
    # denominator = 1 + 50/50 + 0 + 1 = 3
    return 2.0 / 3.0, 1.0 / 3.0


def oracle_shunt_50():
    # a = d = 1, b = 0, c = 1/50 at z0 = 50: denominator = 3, s11 = -1/3
    return 2.0 / 3.0, -1.0 / 3.0


class TestUnwrap:
    def test_already_continuous(self):
        assert np.allclose(unwrap_phase([0.1, 0.2, 0.3]), [0.1, 0.2, 0.3])

    def test_branch_correction(self):
        out = unwrap_phase([3.0, -3.0])
        assert out[0] == pytest.approx(3.0)
        assert out[1] == pytest.approx(-3.0 + 2 * np.pi)

    def test_constant(self):
        assert np.allclose(unwrap_phase([1.0] * 5), 1.0)

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            unwrap_phase([])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.floats(-50, 50, allow_nan=False), min_size=1, max_size=60))
    def test_properties(self, phases):
        out = unwrap_phase(phases)
        assert np.all(np.abs(np.diff(out)) <= np.pi + 1e-12)
        assert np.allclose(
            np.mod(out - np.asarray(phases) + np.pi, 2 * np.pi) - np.pi, 0, atol=1e-9
        )


class TestFrequencyGrid:
    def test_valid(self):
        f = validate_frequency_grid([1e6, 2e6, 3e6])
        assert f.shape == (3,)

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidInputError):
            validate_frequency_grid([0.0, 1.0])

    def test_rejects_unsorted(self):
        with pytest.raises(InvalidInputError):
            validate_frequency_grid([2e6, 1e6])
