import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chgeo.errors import GridError
from chgeo.grid import (
    Field,
    PeriodicGrid,
    deriv,
    helmholtz_apply,
    helmholtz_inverse,
    integrate,
    interp_periodic,
    make_grid,
    spectral_deriv,
)
from helpers import TrigPoly, band_limited


def sine(n, k=1):
    g = make_grid(n)
    return Field(g, np.sin(2 * np.pi * k * g.nodes))


class TestMakeGrid:
    def test_nodes_n8(self):
        g = make_grid(8)
        np.testing.assert_array_equal(g.nodes, np.arange(8) * 0.125)
        assert g.circumference == 1.0

    @pytest.mark.parametrize("n", [7, 4, 0, -8, 12, 255])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(GridError):
            make_grid(n)

    @pytest.mark.parametrize("n", [8.0, "8", True])
    def test_rejects_non_integers(self, n):
        with pytest.raises(GridError):
            make_grid(n)

    def test_spacing(self):
        g = make_grid(256)
        assert g.spacing == 1 / 256
        assert np.all(np.diff(g.nodes) == 1 / 256)

    def test_nodes_read_only(self):
        with pytest.raises(ValueError):
            make_grid(8).nodes[0] = 1.0


class TestField:
    def test_rejects_nan(self):
        with pytest.raises(GridError):
            Field(make_grid(8), [0, 1, 2, np.nan, 0, 0, 0, 0])

    def test_rejects_wrong_length(self):
        with pytest.raises(GridError):
            Field(make_grid(8), np.zeros(9))

    def test_values_are_a_private_copy(self):
        raw = np.zeros(8)
        f = Field(make_grid(8), raw)
        raw[0] = 5.0
        assert f.values[0] == 0.0
        with pytest.raises(ValueError):
            f.values[0] = 1.0


class TestDeriv:
    def test_constant(self):
        g = make_grid(64)
        np.testing.assert_allclose(deriv(Field(g, np.full(64, 3.0))).values, 0.0, atol=1e-13)

    def test_sine(self):
        g = make_grid(256)
        err = np.max(np.abs(deriv(sine(256)).values - 2 * np.pi * np.cos(2 * np.pi * g.nodes)))
        assert err < 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_random_trig_polynomial(self, seed):
        n = 128
        p = TrigPoly(np.random.default_rng(seed), n // 4)
        x = np.arange(n) / n
        for order in (1, 2, 3):
            exact = p(x, order)
            got = spectral_deriv(p(x), order)
            assert np.max(np.abs(got - exact)) <= 1e-12 * np.max(np.abs(exact))

    def test_nyquist_mode_dropped(self):
        n = 16
        alt = (-1.0) ** np.arange(n)
        np.testing.assert_allclose(spectral_deriv(alt), 0.0, atol=1e-12)


class TestHelmholtz:
    def test_constant(self):
        g = make_grid(32)
        np.testing.assert_allclose(helmholtz_inverse(Field(g, np.full(32, 2.5))).values, 2.5, rtol=1e-15)

    def test_sine(self):
        g = make_grid(128)
        expected = np.sin(2 * np.pi * g.nodes) / (1 + 4 * np.pi**2)
        np.testing.assert_allclose(helmholtz_inverse(sine(128)).values, expected, atol=1e-15)

    @pytest.mark.parametrize("seed", range(5))
    def test_forward_operator_recovers_input(self, seed):
        n = 256
        f = band_limited(np.random.default_rng(seed), n, degree=n // 4, decay=0.0)
        g = helmholtz_inverse(Field(make_grid(n), f)).values
        back = g - spectral_deriv(spectral_deriv(g))
        assert np.max(np.abs(back - f)) <= 1e-10 * np.max(np.abs(f))
        np.testing.assert_allclose(helmholtz_apply(g), f, atol=1e-10 * np.max(np.abs(f)))


class TestIntegrate:
    def test_constant(self):
        assert integrate(Field(make_grid(16), np.full(16, 1.75))) == pytest.approx(1.75, abs=1e-15)

    def test_sine(self):
        assert abs(integrate(sine(64))) < 1e-12

    def test_sine_squared(self):
        g = make_grid(64)
        assert integrate(Field(g, np.sin(2 * np.pi * g.nodes) ** 2)) == pytest.approx(0.5, abs=1e-12)


class TestInterp:
    def test_nodes_reproduce_samples(self):
        f = Field(make_grid(64), np.random.default_rng(0).standard_normal(64))
        np.testing.assert_array_equal(interp_periodic(f, f.grid.nodes), f.values)

    def test_sine_at_point(self):
        assert abs(interp_periodic(sine(64), [0.3])[0] - np.sin(0.6 * np.pi)) < 1e-10

    @pytest.mark.parametrize("seed", range(3))
    def test_random_trig_polynomial(self, seed):
        rng = np.random.default_rng(seed)
        n = 128
        p = TrigPoly(rng, n // 2 - 1)
        q = rng.uniform(-3, 3, 100)
        got = interp_periodic(Field(make_grid(n), p(np.arange(n) / n)), q)
        assert np.max(np.abs(got - p(q))) < 1e-10 * np.max(np.abs(p(q)))

    def test_shift_by_one_period(self):
        f = Field(make_grid(32), np.random.default_rng(3).standard_normal(32))
        np.testing.assert_array_equal(interp_periodic(f, f.grid.nodes + 1.0), f.values)

    def test_rejects_non_finite_queries(self):
        with pytest.raises(GridError):
            interp_periodic(sine(16), [0.1, np.inf])


fields = st.integers(0, 2**32 - 1).map(lambda s: band_limited(np.random.default_rng(s), 64, degree=20, decay=1.0))


@settings(max_examples=40, deadline=None)
@given(fields)
def test_multipliers_commute(f):
    a = spectral_deriv(helmholtz_inverse(Field(make_grid(64), f)).values)
    b = helmholtz_inverse(Field(make_grid(64), spectral_deriv(f))).values
    assert np.max(np.abs(a - b)) <= 1e-12 * max(1.0, np.max(np.abs(a)))


@settings(max_examples=40, deadline=None)
@given(fields)
def test_derivative_integrates_to_zero(f):
    assert abs(integrate(deriv(Field(make_grid(64), f)))) <= 1e-12 * max(1.0, np.max(np.abs(f)))


@settings(max_examples=40, deadline=None)
@given(fields)
def test_helmholtz_inverse_contracts(f):
    g = helmholtz_inverse(Field(make_grid(64), f)).values
    assert np.linalg.norm(g) <= np.linalg.norm(f) * (1 + 1e-14)
