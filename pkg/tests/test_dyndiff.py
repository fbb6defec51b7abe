import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, signal, special

from sppsim.dyndiff import (LaueCrystal, fan_profile, fan_profile_bessel, integrated_reflectivity,
                            rocking_curve, thickness_averaged_reflectivity)
from sppsim.errors import DomainError

TB = math.radians(25.6)


def crystal(A):
    return LaueCrystal(TB, A)


def test_full_transfer_at_bragg():
    ig, io = rocking_curve(crystal(math.pi / 2), 0.0)
    assert ig == 1.0 and io == 0.0


def test_conservation_random_samples():
    rng = np.random.default_rng(2024)
    y = rng.normal(0, 20, 10_000)
    A = rng.uniform(1e-3, 100, 10_000)
    pairs = [rocking_curve(crystal(a), yi) for yi, a in zip(y, A)]
    assert all(ig + io == 1.0 and 0.0 <= ig <= 1.0 for ig, io in pairs)


@given(st.floats(-1e6, 1e6), st.floats(1e-3, 1e3))
def test_conservation_property(y, A):
    ig, io = rocking_curve(crystal(A), y)
    assert ig + io == 1.0 and 0.0 <= ig <= 1.0


def test_off_bragg_limit():
    ig, _ = rocking_curve(crystal(3.0), np.array([1e3, 1e6]))
    assert ig[0] <= 1e-6 and ig[1] <= 1e-12


def test_crystal_validation():
    with pytest.raises(DomainError):
        LaueCrystal(0.0, 1.0)
    with pytest.raises(DomainError):
        LaueCrystal(TB, -1.0)


class TestThicknessAverage:
    def test_closed_form_against_quadrature(self):
        for y in (0.0, 0.7, 3.0):
            num, _ = integrate.quad(lambda a: rocking_curve(crystal(a), y)[0], 2.0, 2.0 + math.pi)
            assert thickness_averaged_reflectivity(y, 2.0, 2.0 + math.pi) == pytest.approx(num / math.pi, abs=1e-12)

    def test_pi_window_exact_where_sqrt_is_integer(self):
        # a pi-wide window spans whole periods of sin^2(A s) only when s is an integer
        for y in (0.0, math.sqrt(3.0), math.sqrt(8.0)):
            got = thickness_averaged_reflectivity(y, 5.3, 5.3 + math.pi)
            assert got == pytest.approx(0.5 / (1 + y * y), abs=1e-12)

    def test_wide_window_tends_to_lorentzian(self):
        y = np.linspace(-10, 10, 401)
        got = thickness_averaged_reflectivity(y, 10.0, 10.0 + 1000 * math.pi)
        np.testing.assert_allclose(got, 0.5 / (1 + y**2), atol=1e-3)

    def test_empty_window(self):
        with pytest.raises(DomainError):
            thickness_averaged_reflectivity(0.0, 1.0, 1.0)


class TestFan:
    def test_symmetry(self):
        g = np.linspace(0.02, 0.98, 25)
        c = crystal(10.0)
        np.testing.assert_allclose(fan_profile(c, g), fan_profile(c, -g), rtol=0, atol=1e-6)

    def test_matches_bessel_closed_form(self):
        g = np.linspace(-0.99, 0.99, 41)
        for A in (0.5, 3.0, 10.0):
            c = crystal(A)
            np.testing.assert_allclose(fan_profile(c, g), fan_profile_bessel(c, g), rtol=1e-7, atol=1e-9)

    def test_oscillation_positions_correlate_with_bessel(self):
        c = crystal(10.0)
        g = np.linspace(-0.995, 0.995, 201)
        num, ref = fan_profile(c, g), fan_profile_bessel(c, g)
        assert np.corrcoef(num, ref)[0, 1] > 0.99
        mins_num = signal.argrelmin(num)[0]
        mins_ref = signal.argrelmin(ref)[0]
        assert np.array_equal(mins_num, mins_ref)

    @pytest.mark.parametrize("A", [10.0, 20.0])
    def test_oscillation_count_scales_with_thickness(self, A):
        g = np.linspace(-0.9995, 0.9995, 401)
        prof = fan_profile(crystal(A), g)
        # oracle: one minimum per J0 zero below A on each side of the fan, plus
        # the centre when J0^2 is still falling at u = A
        zeros = special.jn_zeros(0, 40)
        expected = 2 * int(np.sum(zeros < A)) + int(special.j0(A) * special.j1(A) > 0)
        assert signal.argrelmin(prof)[0].size == expected

    def test_edge_enhancement(self):
        A = 10.0
        c = crystal(A)
        x, w = np.polynomial.legendre.leggauss(40)

        def window_mean(lo, hi):
            gg = 0.5 * (hi - lo) * x + 0.5 * (hi + lo)
            return np.dot(w, fan_profile(c, gg)) / 2.0

        # one oscillation period: pi in the Bessel argument A sqrt(1 - Gamma^2)
        edge = window_mean(math.sqrt(1 - (math.pi / A) ** 2), 1.0)
        centre = window_mean(0.0, math.sqrt(1 - ((A - math.pi) / A) ** 2))
        assert edge > centre

    def test_parseval_flux(self):
        c = crystal(10.0)
        x, w = np.polynomial.legendre.leggauss(160)
        flux = np.dot(w, fan_profile(c, x))
        assert flux == pytest.approx(integrated_reflectivity(c), rel=0.01)

    def test_integrated_reflectivity_against_long_range_quadrature(self):
        # oracle: brute-force quadrature on a long finite range plus the 1/(2y^2) mean tail
        for A in (0.3, 4.0):
            c = crystal(A)
            Y = 2000.0
            num, _ = integrate.quad(lambda y: rocking_curve(c, y)[0], 0, Y, limit=20000, epsabs=1e-12)
            oracle = 2 * (num + 0.5 / Y)
            assert integrated_reflectivity(c) == pytest.approx(oracle, rel=1e-5)

    def test_outside_fan(self):
        with pytest.raises(DomainError):
            fan_profile(crystal(1.0), [0.5, 1.0])
