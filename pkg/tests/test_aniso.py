"""Anisotropic-model tests: regime classification, mesoscopic windows and
their closed-form predictors."""

import math

import numpy as np
import pytest

from boseloops.aniso import (AnisotropicRegime, ChiSplit, MesoPrediction,
                             additional_q2d, classify, meso_q1d,
                             meso_q1d_prediction, noncondensate_aniso,
                             q2d_additional_limit, q2d_chi_split)
from boseloops.errors import DomainError, ModelError, RegimeError
from boseloops.kernels import (Isotropic, Quasi1D, Quasi2D, ground_energy,
                               ground_state_product, log_kernel_d)
from boseloops.rdm import noncondensate
from boseloops.specfun import de_broglie
from boseloops.thermo import (CanonicalTarget, _nu_critical_trap, nu_m,
                              solve_gap)

BETA = 1.0


class TestClassify:
    def test_isotropic_rejected(self):
        with pytest.raises(ModelError):
            classify(CanonicalTarget(BETA, 1.0), Isotropic(3, 0.3))

    def test_quasi1d_regimes(self):
        trap = Quasi1D(0.3, 1.0)
        nuc = _nu_critical_trap(BETA, trap)
        numm = nu_m(BETA, trap)
        assert classify(CanonicalTarget(BETA, 0.5 * nuc), trap).tag \
            == "subcritical"
        assert classify(CanonicalTarget(BETA, 0.5 * (nuc + numm)), trap).tag \
            == "gbec_only"
        assert classify(CanonicalTarget(BETA, 2.0 * numm), trap).tag \
            == "coexistence"

    def test_quasi2d_regimes(self):
        trap = Quasi2D(0.3, 1.0)
        nuc = _nu_critical_trap(BETA, trap)
        assert classify(CanonicalTarget(BETA, 0.5 * nuc), trap).tag \
            == "subcritical"
        assert classify(CanonicalTarget(BETA, 2.0 * nuc), trap).tag \
            == "supercritical"

    def test_boundary_flag(self):
        trap = Quasi2D(0.3, 1.0)
        nuc = _nu_critical_trap(BETA, trap)
        reg = classify(CanonicalTarget(BETA, nuc * (1.0 + 1e-9)), trap)
        assert isinstance(reg, AnisotropicRegime)
        assert reg.critical_boundary
        assert not classify(CanonicalTarget(BETA, 2.0 * nuc), trap) \
            .critical_boundary

    def test_eta(self):
        trap = Quasi2D(0.3, 1.0)
        nuc = _nu_critical_trap(BETA, trap)
        assert classify(CanonicalTarget(BETA, 2.0 * nuc), trap).eta \
            == pytest.approx(2.0, rel=1e-12)


class TestMesoQuasi1D:
    def test_vs_brute_force(self):
        # enumerate the defined window sum directly from the kernels
        kappa = 0.4
        trap = Quasi1D(kappa, 1.0)
        target = CanonicalTarget(BETA, 1.5 * _nu_critical_trap(BETA, trap))
        gap = solve_gap(target, trap)
        x = np.zeros(3)
        n = int(math.floor(kappa ** -1.25))
        m = int(math.floor(math.exp(1.0 / kappa**2)))
        e0 = ground_energy(trap)
        dyad = ground_state_product(x, x, trap)
        l = np.arange(n + 1, m + 1, dtype=float)
        log_k = log_kernel_d(x, x, l * BETA, trap) + e0 * l * BETA
        brute = float(np.sum(np.exp(-l * BETA * gap)
                             * (np.exp(log_k) - dyad)))
        assert meso_q1d(x, x, target, trap) == pytest.approx(
            math.log(brute), abs=1e-10)

    def test_model_check(self):
        with pytest.raises(ModelError):
            meso_q1d(np.zeros(3), np.zeros(3), CanonicalTarget(BETA, 1.0),
                     Quasi2D(0.3, 1.0))

    def test_grows_as_kappa_shrinks(self):
        vals = []
        for kappa in (0.4, 0.3, 0.25):
            trap = Quasi1D(kappa, 1.0)
            target = CanonicalTarget(BETA, 2.0 * nu_m(BETA, trap))
            vals.append(meso_q1d(np.zeros(3), np.zeros(3), target, trap))
        assert vals[0] < vals[1] < vals[2]


class TestMesoPrediction:
    def test_regime_split(self):
        trap = Quasi1D(0.3, 1.0)
        nuc = _nu_critical_trap(BETA, trap)
        numm = nu_m(BETA, trap)
        mid = meso_q1d_prediction(
            CanonicalTarget(BETA, 0.5 * (nuc + numm)), trap)
        deep = meso_q1d_prediction(CanonicalTarget(BETA, 2.0 * numm), trap)
        assert isinstance(mid, MesoPrediction)
        assert mid.regime == "gbec_only"
        assert deep.regime == "coexistence"
        # coexistence exponent saturates at omega_c^2/(2 omega_perp^2 kappa^2)
        assert deep.exponent == pytest.approx(1.0 / (2.0 * 0.09), rel=1e-12)
        assert deep.log_value == deep.log_prefactor + deep.exponent

    def test_prefactor_normalizations_agree(self):
        # the two printed prefactor forms are algebraically identical
        for kappa in (0.4, 0.3, 0.25):
            trap = Quasi1D(kappa, 1.0)
            pred = meso_q1d_prediction(
                CanonicalTarget(BETA, 2.0 * nu_m(BETA, trap)), trap)
            assert pred.log_prefactor == pytest.approx(
                pred.log_prefactor_alt, abs=1e-12)

    def test_subcritical_rejected(self):
        trap = Quasi1D(0.3, 1.0)
        with pytest.raises(RegimeError):
            meso_q1d_prediction(
                CanonicalTarget(BETA, 0.5 * _nu_critical_trap(BETA, trap)),
                trap)


class TestAdditionalQuasi2D:
    def test_limit_closed_form(self):
        trap = Quasi2D(0.05, 1.0)
        lam = de_broglie(BETA)
        expected = 2.0 * math.sqrt(1.0 / math.pi) / lam**2
        assert q2d_additional_limit(BETA, trap) == pytest.approx(
            expected, rel=1e-14)

    def test_positive_and_window_monotone_in_chi(self):
        trap = Quasi2D(0.05, 1.0)
        target = CanonicalTarget(BETA, 1.5 * _nu_critical_trap(BETA, trap))
        x = np.zeros(3)
        small = additional_q2d(x, x, target, trap, chi=1.0)
        large = additional_q2d(x, x, target, trap, chi=2.0)
        assert 0.0 < small <= large

    def test_chi_split_is_a_partition(self):
        trap = Quasi2D(0.05, 1.0)
        target = CanonicalTarget(BETA, 1.5 * _nu_critical_trap(BETA, trap))
        x = np.zeros(3)
        split = q2d_chi_split(x, x, target, trap)
        assert isinstance(split, ChiSplit)
        whole = additional_q2d(x, x, target, trap, chi=2.0)
        assert split.first_half + split.second_half == pytest.approx(
            whole, rel=1e-9)
        assert split.predicted_half == pytest.approx(
            0.5 * q2d_additional_limit(BETA, trap), rel=1e-14)

    def test_chi_validation(self):
        trap = Quasi2D(0.05, 1.0)
        with pytest.raises(DomainError):
            additional_q2d(np.zeros(3), np.zeros(3),
                           CanonicalTarget(BETA, 1.0), trap, chi=0.0)

    def test_model_check(self):
        with pytest.raises(ModelError):
            additional_q2d(np.zeros(3), np.zeros(3),
                           CanonicalTarget(BETA, 1.0), Quasi1D(0.3, 1.0))


class TestNoncondensateAniso:
    def test_delegates_to_engine(self):
        trap = Quasi2D(0.3, 1.0)
        target = CanonicalTarget(BETA, 1.0)
        x = np.zeros(3)
        assert noncondensate_aniso(x, x, target, trap) == pytest.approx(
            noncondensate(x, x, target, trap), rel=1e-12)

    def test_isotropic_rejected(self):
        with pytest.raises(ModelError):
            noncondensate_aniso(np.zeros(3), np.zeros(3),
                                CanonicalTarget(BETA, 1.0), Isotropic(3, 0.3))
