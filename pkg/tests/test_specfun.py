"""Special-function oracles: frozen reference values and dual-route checks."""

import math

import numpy as np
import pytest
from scipy import integrate, special

from boseloops.errors import DomainError
from boseloops.specfun import (DEFAULT_CONSTANTS, DEFAULT_CONTROL,
                               PhysicalConstants, SeriesControl, de_broglie,
                               gamma0, hermite_eigen_table,
                               hermite_eigenfunction, polylog)

# frozen reference constants (Riemann zeta values, independently tabulated)
ZETA_3_2 = 2.6123753486854883433
ZETA_2 = 1.6449340668482264365
ZETA_5_2 = 1.3414872572509171798
ZETA_3 = 1.2020569031595942854
# dilogarithm at 1/2: pi^2/12 - ln^2(2)/2
LI2_HALF = 0.5822405264650125059


class TestPolylog:
    @pytest.mark.parametrize("theta,expected", [
        (1.5, ZETA_3_2), (2.0, ZETA_2), (2.5, ZETA_5_2), (3.0, ZETA_3)])
    def test_zeta_values(self, theta, expected):
        assert polylog(theta, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_dilog_half(self):
        assert polylog(2.0, 0.5) == pytest.approx(LI2_HALF, abs=1e-12)

    def test_order_one_closed_form(self):
        for xi in (0.1, 0.5, 0.9, 0.999999):
            assert polylog(1.0, xi) == pytest.approx(-math.log1p(-xi), rel=1e-13)

    def test_matches_direct_series(self):
        # independent brute-force summation
        for theta in (0.5, 1.5, 3.0):
            for xi in (0.3, 0.9):
                n = np.arange(1, 2_000_000, dtype=float)
                brute = float(np.sum(xi**n / n**theta))
                assert polylog(theta, xi) == pytest.approx(brute, rel=1e-12)

    def test_near_one_continuity(self):
        # the Euler-Maclaurin branch must join the direct branch smoothly
        lo = polylog(1.5, math.exp(-0.0100001))
        hi = polylog(1.5, math.exp(-0.0099999))
        assert hi > lo
        assert hi - lo < 1e-4

    def test_near_one_vs_quadrature(self):
        # g_theta(e^-a) = (1/Gamma(theta)) int_0^inf t^{theta-1}/(e^{t+a}-1) dt
        for theta in (1.5, 2.5):
            for alpha in (1e-6, 1e-3):
                val, _ = integrate.quad(
                    lambda t: t ** (theta - 1.0) * math.exp(-t - alpha)
                    / (-math.expm1(-t - alpha)), 0.0, np.inf, limit=200)
                ref = val / special.gamma(theta)
                assert polylog(theta, math.exp(-alpha)) == pytest.approx(
                    ref, rel=1e-8)

    def test_domain_errors(self):
        with pytest.raises(DomainError):
            polylog(1.0, 1.0)
        with pytest.raises(DomainError):
            polylog(2.0, 1.5)
        with pytest.raises(DomainError):
            polylog(2.0, -0.1)
        with pytest.raises(DomainError):
            polylog(0.0, 0.5)

    def test_zero_argument(self):
        assert polylog(2.0, 0.0) == 0.0


class TestGamma0:
    def test_vs_scipy_exp1(self):
        for x in (0.01, 0.3, 0.999, 1.0, 1.001, 5.0, 30.0, 200.0):
            assert gamma0(x) == pytest.approx(float(special.exp1(x)),
                                              rel=1e-13)

    def test_branch_continuity(self):
        assert gamma0(1.0 - 1e-12) == pytest.approx(gamma0(1.0 + 1e-12),
                                                    rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            gamma0(0.0)
        with pytest.raises(DomainError):
            gamma0(-1.0)


class TestDeBroglie:
    def test_natural_units(self):
        assert de_broglie(1.0) == pytest.approx(math.sqrt(2.0 * math.pi),
                                                rel=1e-15)

    def test_scaling(self):
        c = PhysicalConstants(hbar=2.0, mass=0.5)
        assert de_broglie(3.0, c) == pytest.approx(
            math.sqrt(2.0 * math.pi * 4.0 * 3.0 / 0.5), rel=1e-15)

    def test_domain(self):
        with pytest.raises(DomainError):
            de_broglie(0.0)


class TestHermite:
    def test_ground_and_first_states(self):
        # psi_0 = (c/pi)^{1/4} e^{-c x^2/2}, psi_1 = sqrt(2c) x psi_0
        c = 0.7
        for x in (-1.3, 0.0, 0.4, 2.0):
            psi0 = (c / math.pi) ** 0.25 * math.exp(-0.5 * c * x * x)
            psi1 = math.sqrt(2.0 * c) * x * psi0
            assert hermite_eigenfunction(0, x, c) == pytest.approx(
                psi0, rel=1e-13, abs=1e-300)
            assert hermite_eigenfunction(1, x, c) == pytest.approx(
                psi1, rel=1e-13, abs=1e-300)

    def test_orthonormality(self):
        kappa = 0.5
        for s, t in ((0, 0), (3, 3), (7, 7), (2, 5), (0, 8)):
            val, _ = integrate.quad(
                lambda x: hermite_eigenfunction(s, x, kappa)
                * hermite_eigenfunction(t, x, kappa), -np.inf, np.inf,
                limit=200)
            assert val == pytest.approx(1.0 if s == t else 0.0, abs=1e-10)

    def test_table_matches_single(self):
        tab = hermite_eigen_table(40, 1.7, 0.9)
        for s in (0, 1, 17, 40):
            assert tab[s] == hermite_eigenfunction(s, 1.7, 0.9)

    def test_deep_tunneling_finite(self):
        # far in the forbidden region the values underflow to 0, never nan
        tab = hermite_eigen_table(300, 60.0, 1.0)
        assert np.all(np.isfinite(tab))

    def test_domain(self):
        with pytest.raises(DomainError):
            hermite_eigenfunction(-1, 0.0, 1.0)
        with pytest.raises(DomainError):
            hermite_eigenfunction(2, 0.0, 0.0)


class TestConfigObjects:
    def test_series_control_validation(self):
        with pytest.raises(DomainError):
            SeriesControl(rel_tol=0.0)
        with pytest.raises(DomainError):
            SeriesControl(max_terms=0)

    def test_constants_validation(self):
        with pytest.raises(DomainError):
            PhysicalConstants(hbar=-1.0)

    def test_defaults(self):
        assert DEFAULT_CONTROL.sigma == 1.25
        assert DEFAULT_CONSTANTS.hbar == 1.0
