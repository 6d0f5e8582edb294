"""Quasi-1D and quasi-2D specializations: regime classification, mesoscopic
loop-window sums and their closed-form predictors.

Both anisotropic models share the loop-window engine of `rdm`; what differs
is where the windows are cut and which closed form the window is compared
against.  Quasi-1D has a second critical number nu_m and a mesoscopic sum
that diverges (as kappa -> 0) like a known exponential; quasi-2D has no
generalized condensate, and its mesoscopic window converges to a finite
additional term independent of position.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ModelError, RegimeError
from .kernels import Isotropic, Quasi1D, Quasi2D, TrapModel, ground_energy
from .rdm import _noncond_range_sum
from .specfun import DEFAULT_CONTROL, SeriesControl, de_broglie, polylog
from .thermo import (CRITICAL_BAND, CanonicalTarget, _nu_critical_trap, nu_m,
                     solve_gap)


@dataclass(frozen=True)
class AnisotropicRegime:
    """Condensation regime of an anisotropic trap.

    tag: 'subcritical', 'gbec_only' or 'coexistence' (Quasi1D),
    'supercritical' (Quasi2D); eta = nu/nu_c; critical_boundary marks nu
    within 1e-6 relative of a critical value, where asymptotic comparisons
    are unreliable.
    """

    tag: str
    eta: float
    critical_boundary: bool


def classify(target: CanonicalTarget, trap: TrapModel,
             ctl: SeriesControl = DEFAULT_CONTROL) -> AnisotropicRegime:
    """Regime of (beta, nu) relative to nu_c (and nu_m for Quasi1D)."""
    if isinstance(trap, Isotropic):
        raise ModelError("classify applies to anisotropic traps")
    beta, nu = target.beta, target.nu
    nu_c = _nu_critical_trap(beta, trap, ctl)
    eta = nu / nu_c
    boundary = abs(nu - nu_c) < CRITICAL_BAND * nu_c
    if isinstance(trap, Quasi1D):
        numm = nu_m(beta, trap, ctl)
        boundary = boundary or abs(nu - numm) < CRITICAL_BAND * nu_c
        if nu < nu_c:
            tag = "subcritical"
        elif nu < numm:
            tag = "gbec_only"
        else:
            tag = "coexistence"
    else:
        tag = "subcritical" if nu < nu_c else "supercritical"
    return AnisotropicRegime(tag, eta, boundary)


def _meso_window_sum(x, y, target: CanonicalTarget, trap: TrapModel,
                     l_lo: int, l_hi, ctl: SeriesControl) -> float:
    gap = solve_gap(target, trap, ctl)
    return _noncond_range_sum(x, y, target.beta, gap, trap, l_lo, l_hi, ctl)


def meso_q1d(x, y, target: CanonicalTarget, trap: Quasi1D,
             ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """log of the mesoscopic (dyad-subtracted) loop-window sum for Quasi1D,
    window (N, M] with N = floor(kappa^-sigma), M = floor(e^{kappa_c^2/kappa^2})
    (treated as infinite once it exceeds 2^62)."""
    if not isinstance(trap, Quasi1D):
        raise ModelError("meso_q1d requires a Quasi1D trap")
    n_short = int(math.floor(trap.kappa ** (-ctl.sigma)))
    log_m = trap.kappa_c**2 / trap.kappa**2
    l_hi = None if log_m >= 62.0 * math.log(2.0) else int(math.floor(math.exp(log_m)))
    val = _meso_window_sum(x, y, target, trap, n_short + 1, l_hi, ctl)
    if not val > 0.0:
        raise DomainError("mesoscopic window sum is not positive; no log")
    return math.log(val)


@dataclass(frozen=True)
class MesoPrediction:
    """Closed-form prediction for log of the Quasi1D mesoscopic sum:
    log = log_prefactor + exponent.  Two algebraically equivalent prefactor
    normalizations are reported (see log_prefactor_alt)."""

    regime: str
    exponent: float
    log_prefactor: float
    log_prefactor_alt: float

    @property
    def log_value(self) -> float:
        return self.log_prefactor + self.exponent


def meso_q1d_prediction(target: CanonicalTarget, trap: Quasi1D,
                        ctl: SeriesControl = DEFAULT_CONTROL) -> MesoPrediction:
    """Predicted asymptotics of the Quasi1D mesoscopic sum for nu > nu_c:
    exponent g_3(1)(eta-1)/(2 (hbar omega_perp kappa beta)^2) below nu_m,
    omega_c^2/(2 omega_perp^2 kappa^2) above."""
    if not isinstance(trap, Quasi1D):
        raise ModelError("meso_q1d_prediction requires a Quasi1D trap")
    beta, nu = target.beta, target.nu
    consts = trap.consts
    nu_c = _nu_critical_trap(beta, trap, ctl)
    numm = nu_m(beta, trap, ctl)
    if not nu > nu_c:
        raise RegimeError("mesoscopic prediction applies for nu > nu_c")
    eta = nu / nu_c
    if nu <= numm:
        exponent = polylog(3.0, 1.0, ctl) * (eta - 1.0) \
            / (2.0 * (consts.hbar * trap.omega_perp * trap.kappa * beta) ** 2)
        regime = "gbec_only"
    else:
        omega_c = trap.omega_perp * trap.kappa_c
        exponent = omega_c**2 / (2.0 * trap.omega_perp**2 * trap.kappa**2)
        regime = "coexistence"
    kappa_perp = trap.kappas[1]
    lam = de_broglie(beta, consts)
    pref = consts.mass * trap.omega_perp * kappa_perp / (math.sqrt(math.pi)
                                                         * consts.hbar * lam)
    pref_alt = kappa_perp * math.sqrt(consts.mass**3 * trap.omega_perp**2
                                      / (2.0 * math.pi**2 * beta * consts.hbar**4))
    return MesoPrediction(regime, exponent, math.log(pref), math.log(pref_alt))


def q2d_additional_limit(beta: float, trap: Quasi2D) -> float:
    """Closed-form kappa -> 0 value of the quasi-2D additional term:
    2 sqrt(m omega_c / (pi hbar)) / lambda^2 with omega_c = omega_1 kappa_c."""
    omega_c = trap.omega1 * trap.kappa_c
    lam = de_broglie(beta, trap.consts)
    return 2.0 * math.sqrt(trap.consts.mass * omega_c
                           / (math.pi * trap.consts.hbar)) / lam**2


def additional_q2d(x, y, target: CanonicalTarget, trap: Quasi2D,
                   ctl: SeriesControl = DEFAULT_CONTROL,
                   chi: float = 2.0) -> float:
    """Quasi-2D mesoscopic (dyad-subtracted) loop-window sum, window
    (N, M~] with N = floor(kappa^-sigma) and
    M~ = floor(kappa^-sigma2 e^{chi sqrt(kappa_c/kappa)})."""
    if not isinstance(trap, Quasi2D):
        raise ModelError("additional_q2d requires a Quasi2D trap")
    if chi <= 0:
        raise DomainError("chi must be positive")
    n_short = int(math.floor(trap.kappa ** (-ctl.sigma)))
    sigma2 = 0.0 if ctl.sigma2 is None else ctl.sigma2
    log_m = chi * math.sqrt(trap.kappa_c / trap.kappa) \
        - sigma2 * math.log(trap.kappa)
    l_hi = None if log_m >= 62.0 * math.log(2.0) else \
        max(int(math.floor(math.exp(log_m))), n_short)
    return _meso_window_sum(x, y, target, trap, n_short + 1, l_hi, ctl)


@dataclass(frozen=True)
class ChiSplit:
    """Quasi-2D mesoscopic window split at the intermediate cutoff
    floor(kappa^-sigma2 / kappa_perp): the two windows' sums and the
    predicted half of the limiting additional term."""

    first_half: float
    second_half: float
    predicted_half: float


def q2d_chi_split(x, y, target: CanonicalTarget, trap: Quasi2D,
                  ctl: SeriesControl = DEFAULT_CONTROL) -> ChiSplit:
    """Split the chi=2 window at chi=1 and report both partial sums."""
    if not isinstance(trap, Quasi2D):
        raise ModelError("q2d_chi_split requires a Quasi2D trap")
    n_short = int(math.floor(trap.kappa ** (-ctl.sigma)))
    sigma2 = 0.0 if ctl.sigma2 is None else ctl.sigma2
    kappa_perp = trap.kappas[1]
    mid = max(int(math.floor(trap.kappa ** (-sigma2) / kappa_perp)), n_short)
    log_m = 2.0 * math.sqrt(trap.kappa_c / trap.kappa) \
        - sigma2 * math.log(trap.kappa)
    l_hi = None if log_m >= 62.0 * math.log(2.0) else \
        max(int(math.floor(math.exp(log_m))), mid)
    first = _meso_window_sum(x, y, target, trap, n_short + 1, mid, ctl)
    second = _meso_window_sum(x, y, target, trap, mid + 1, l_hi, ctl)
    return ChiSplit(first, second, 0.5 * q2d_additional_limit(target.beta, trap))


def noncondensate_aniso(x, y, target: CanonicalTarget, trap: TrapModel,
                        ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Ground-state-subtracted reduced density matrix for anisotropic traps."""
    if isinstance(trap, Isotropic):
        raise ModelError("use noncondensate for isotropic traps")
    from .rdm import noncondensate

    return noncondensate(x, y, target, trap, ctl)
