import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from dunklb2.errors import ConvergenceError
from dunklb2.specfun import (
    T_MAX,
    SeriesControl,
    bessel_i_norm,
    bessel_i_norm_disk,
    bessel_i_norm_theta,
    bessel_sqrt_halves_derivative,
    ln_gamma,
)

# normalized I_nu(t) = Gamma(nu+1) (2/t)^nu I_nu(t), frozen from mpmath at 30 digits
FROZEN_BESSEL = {
    (1.5, 3.0): 2.2427901177692661808,
    (3.0, 5.0): 3.9671616649540371407,
    (0.75, 1.0): 1.1494968647937595579,
    (2.5, 10.0): 120.59489977370247355,
    (1.0, 5.0): 9.7342568569802108797,
    (4.2, 17.3): 7061.5888805656525004,
}


def mp_lngamma(x):
    with mpmath.workdps(40):
        return float(mpmath.loggamma(mpmath.mpf(x)))


class TestLnGamma:
    def test_one_and_five(self):
        assert ln_gamma(1) == 0.0
        assert ln_gamma(5) == pytest.approx(math.log(24), rel=1e-15)

    def test_half(self):
        assert ln_gamma(0.5) == pytest.approx(0.57236494292470008707, rel=1e-15)

    @pytest.mark.parametrize("x", [1e-3, 0.3, 0.9999, 1.0001, 1.7, 1.9999, 2.0001, 2.6, 7.5, 33.3, 169.9])
    def test_relative_accuracy(self, x):
        ref = mp_lngamma(x)
        assert abs(ln_gamma(x) - ref) <= 1e-13 * abs(ref) + 1e-300

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
    def test_domain(self, x):
        with pytest.raises(ValueError):
            ln_gamma(x)


class TestSeries:
    def test_zero(self):
        assert bessel_i_norm(2.5, 0.0) == 1.0

    def test_half_integer_closed_form(self):
        assert bessel_i_norm(0.5, 1.0) == pytest.approx(math.sinh(1.0), rel=1e-15)

    @pytest.mark.parametrize("key", sorted(FROZEN_BESSEL))
    def test_frozen(self, key):
        assert bessel_i_norm(*key) == pytest.approx(FROZEN_BESSEL[key], rel=1e-14)

    def test_matches_theta(self):
        assert bessel_i_norm(1.5, 3.0) == pytest.approx(bessel_i_norm_theta(1.5, 3.0), rel=1e-10)

    def test_array_input(self):
        t = np.array([0.0, 1.0, -2.0])
        out = bessel_i_norm(0.5, t)
        assert out.shape == (3,)
        assert out[2] == pytest.approx(math.sinh(2.0) / 2.0, rel=1e-15)

    def test_overflow(self):
        with pytest.raises(OverflowError):
            bessel_i_norm(1.0, T_MAX * 1.01)

    def test_nonconvergence(self):
        with pytest.raises(ConvergenceError):
            bessel_i_norm(1.0, 10.0, SeriesControl(max_terms=3))

    @pytest.mark.parametrize("kw", [{"rel_tol": 0.0}, {"max_terms": 0}])
    def test_control_validation(self, kw):
        with pytest.raises(ValueError):
            SeriesControl(**kw)

    def test_order_domain(self):
        with pytest.raises(ValueError):
            bessel_i_norm(-0.5, 1.0)

    @given(st.floats(0.0, 5.0), st.floats(-30.0, 30.0))
    def test_even_and_bounded_below(self, nu, t):
        a, b = bessel_i_norm(nu, t), bessel_i_norm(nu, -t)
        assert a == b
        assert a >= 1.0

    @given(st.floats(0.05, 5.0))
    def test_monotone_on_grid(self, nu):
        vals = bessel_i_norm(nu, np.linspace(0.0, 25.0, 251))
        assert np.all(np.diff(vals) >= 0)


class TestTheta:
    def test_zero(self):
        assert bessel_i_norm_theta(1.0, 0.0) == pytest.approx(1.0, rel=1e-14)

    def test_closed_form(self):
        assert bessel_i_norm_theta(0.5, 2.0) == pytest.approx(1.8134302039235093838, rel=1e-13)

    def test_series_oracle(self):
        assert bessel_i_norm_theta(3.0, 5.0) == pytest.approx(bessel_i_norm(3.0, 5.0), rel=1e-9)

    def test_needs_positive_order(self):
        with pytest.raises(ValueError):
            bessel_i_norm_theta(0.0, 1.0)

    @given(st.floats(0.1, 5.0), st.floats(0.0, 20.0))
    def test_agrees_with_series(self, nu, t):
        assert bessel_i_norm_theta(nu, t) == pytest.approx(bessel_i_norm(nu, t), rel=1e-12)


class TestDisk:
    def test_origin(self):
        assert bessel_i_norm_disk(2.0, (0.0, 0.0)) == pytest.approx(1.0, rel=1e-13)

    def test_rotation_invariance(self):
        assert bessel_i_norm_disk(1.0, (3.0, 4.0)) == pytest.approx(bessel_i_norm(1.0, 5.0), rel=1e-8)

    def test_singular_weight(self):
        assert bessel_i_norm_disk(0.75, (1.0, 0.0)) == pytest.approx(bessel_i_norm(0.75, 1.0), rel=1e-6)

    @given(st.floats(0.1, 5.0), st.floats(0.0, 20.0), st.floats(0.0, 2 * math.pi))
    def test_agrees_with_series(self, nu, r, phi):
        z = (r * math.cos(phi), r * math.sin(phi))
        assert bessel_i_norm_disk(nu, z) == pytest.approx(bessel_i_norm(nu, r), rel=1e-10)


class TestDerivativeRule:
    def test_substitution(self):
        assert bessel_sqrt_halves_derivative(0.5, 2.0) == pytest.approx(0.091969860292860580399,
                                                                         rel=1e-14)

    def test_small_t(self):
        assert bessel_sqrt_halves_derivative(1.0, 1e-300) == pytest.approx(1.0 / 16.0, rel=1e-15)

    def test_needs_positive_t(self):
        with pytest.raises(ValueError):
            bessel_sqrt_halves_derivative(1.0, 0.0)

    def test_finite_difference(self):
        f = lambda t: bessel_i_norm(1.5, math.sqrt(t / 2.0))
        h = 1e-5
        fd = (f(8.0 + h) - f(8.0 - h)) / (2 * h)
        assert abs(fd - bessel_sqrt_halves_derivative(1.5, 8.0)) <= 1e-7

    @pytest.mark.parametrize("nu", [0.5, 1.5, 3.0])
    def test_second_order_decay(self, nu):
        t = 6.0
        f = lambda s: bessel_i_norm(nu, math.sqrt(s / 2.0))
        exact = bessel_sqrt_halves_derivative(nu, t)
        errs = [abs((f(t + h) - f(t - h)) / (2 * h) - exact) for h in (1e-2, 5e-3)]
        assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)
