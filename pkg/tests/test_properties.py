"""Inequality and property-based tests.

The hyperbolic and exponential bounds below underpin the convergence
estimates used throughout the series engines; they are checked numerically
on a dense sample, using the package's stable helpers where one exists.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from boseloops.kernels import (Isotropic, Quasi1D, _coth, _log_sinh,
                               ground_energy, mehler_kernel_1d)
from boseloops.rdm import loop_decompose, rdm_loops
from boseloops.specfun import polylog
from boseloops.thermo import (CanonicalTarget, GrandCanonicalPoint, bose,
                              log1mexp, nu_rescaled, solve_gap)

RNG = np.random.default_rng(20260824)
X_SAMPLE = RNG.uniform(0.0, 100.0, size=10_000)
X_POS = X_SAMPLE[X_SAMPLE > 0.0]


class TestHyperbolicBounds:
    def test_cosh_bounds(self):
        # 1 <= cosh x <= e^x
        c = np.cosh(X_SAMPLE)
        assert np.all(c >= 1.0)
        assert np.all(c <= np.exp(X_SAMPLE))

    def test_sinh_bounds(self):
        # x <= sinh x <= e^x / 2, via the log-stable helper
        s = np.exp(_log_sinh(X_POS))
        assert np.all(s >= X_POS)
        # the ratio approaches 1/2 from below; allow a few ulp of rounding
        assert np.all(np.exp(_log_sinh(X_POS) - X_POS) <= 0.5 * (1.0 + 1e-14))

    def test_tanh_bounds(self):
        t = np.tanh(X_SAMPLE)
        assert np.all(t >= 0.0)
        assert np.all(t <= 1.0)

    def test_coth_bounds(self):
        # 1/x <= coth x <= (1 + x)/x for x > 0
        c = _coth(X_POS)
        assert np.all(c >= 1.0 / X_POS)
        assert np.all(c <= (1.0 + X_POS) / X_POS)


class TestExponentialBounds:
    def test_one_minus_exp_bounds(self):
        # x/(1+x) < 1 - e^{-x} < x for x > 0, with 1 - e^{-x} from log1mexp
        om = np.exp(log1mexp(X_POS))
        assert np.all(om > X_POS / (1.0 + X_POS))
        assert np.all(om < X_POS)

    def test_expm1_bounds(self):
        # x <= e^x - 1 <= x e^x
        e = np.expm1(X_POS)
        assert np.all(e >= X_POS)
        assert np.all(e <= X_POS * np.exp(X_POS))

    @pytest.mark.parametrize("p,q", [(0.5, 1.0), (1.0, 0.3), (2.0, 1.0),
                                     (3.0, 0.05), (1.5, 2.0)])
    def test_power_times_exponential_bound(self, p, q):
        # x^p e^{-qx} <= (2p/(e q))^p e^{-qx/2}, proved by maximizing the
        # left side against the half-rate envelope; checked in log form
        lhs = p * np.log(X_POS) - q * X_POS
        rhs = p * (math.log(2.0 * p / q) - 1.0) - 0.5 * q * X_POS
        assert np.all(lhs <= rhs + 1e-12)


class TestHypothesisProperties:
    @given(theta=st.floats(0.6, 4.0), xi=st.floats(0.01, 0.95))
    def test_polylog_monotone(self, theta, xi):
        # increasing in xi, decreasing in theta
        assert polylog(theta, xi * 1.02) > polylog(theta, xi)
        assert polylog(theta + 0.3, xi) < polylog(theta, xi)

    @given(u=st.floats(1e-10, 500.0))
    def test_log1mexp_matches_direct(self, u):
        direct = math.log(-math.expm1(-u))
        assert float(log1mexp(u)) == pytest.approx(direct, rel=1e-12)

    @given(gap=st.floats(1e-6, 5.0))
    def test_bose_positive_decreasing(self, gap):
        assert 0.0 < float(bose(2.0 * gap)) < float(bose(gap))

    @settings(max_examples=30, deadline=None)
    @given(x=st.floats(-2.0, 2.0), y=st.floats(-2.0, 2.0),
           t=st.floats(0.05, 5.0), wk=st.floats(0.05, 2.0))
    def test_mehler_positive_symmetric(self, x, y, t, wk):
        k = mehler_kernel_1d(x, y, t, wk)
        assert k > 0.0
        assert k == pytest.approx(mehler_kernel_1d(y, x, t, wk), rel=1e-12)

    @settings(max_examples=20, deadline=None)
    @given(nu=st.floats(0.1, 20.0), kappa=st.floats(0.05, 0.9))
    def test_gap_solver_residual(self, nu, kappa):
        trap = Isotropic(3, kappa)
        target = CanonicalTarget(1.0, nu)
        gap = solve_gap(target, trap)
        pt = GrandCanonicalPoint(1.0, ground_energy(trap) - gap, trap)
        assert nu_rescaled(pt) == pytest.approx(nu, rel=1e-9)

    @settings(max_examples=15, deadline=None)
    @given(nu=st.floats(0.5, 5.0), x0=st.floats(-1.0, 1.0),
           y0=st.floats(-1.0, 1.0))
    def test_rdm_symmetry_and_cauchy_schwarz(self, nu, x0, y0):
        trap = Isotropic(1, 0.4)
        target = CanonicalTarget(1.0, nu)
        x, y = np.array([x0]), np.array([y0])
        rxy = rdm_loops(x, y, target, trap)
        assert rxy == pytest.approx(rdm_loops(y, x, target, trap), rel=1e-11)
        assert rxy ** 2 <= rdm_loops(x, x, target, trap) \
            * rdm_loops(y, y, target, trap) * (1.0 + 1e-11)

    @settings(max_examples=15, deadline=None)
    @given(nu=st.floats(0.5, 6.0), kappa=st.floats(0.15, 0.6))
    def test_loop_partition_exact(self, nu, kappa):
        trap = Quasi1D(kappa, 1.0)
        dec = loop_decompose(np.zeros(3), np.zeros(3),
                             CanonicalTarget(1.0, nu), trap)
        assert dec.short_sum + dec.meso_sum + dec.macro_sum == dec.total
