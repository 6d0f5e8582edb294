"""Bulk grand-canonical quantities: loop-series particle numbers, grand
potential, critical numbers, chemical-potential inversion, occupations and
g-BEC band sums.

The central object is the loop series nu = |kappa|^d sum_l z^l Tr G(l beta).
Near condensation the gap Delta = E0 - mu becomes tiny and naive truncation
would need ~1/(beta*Delta) terms; beyond the loop length where the trace has
collapsed onto its ground-state asymptote e^{-E0 l beta} the remainder is an
exact geometric series and is summed in closed form.  For the anisotropic
models one axis relaxes astronomically more slowly than the others; its
factor (1-e^{-a l})^{-1} is expanded into the exact sum over that axis'
quantum number, which turns the remainder into a rapidly convergent double
geometric sum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BracketError, ConvergenceError, DomainError, ModelError,
                     RegimeError)
from .kernels import (Isotropic, Quasi1D, Quasi2D, TrapModel, axis_omega_kappa,
                      eigenvalue, ground_energy)
from .specfun import (DEFAULT_CONTROL, PhysicalConstants, SeriesControl,
                      polylog)

_ZETA2 = math.pi**2 / 6.0

# window outside which a nu is considered safely away from a critical value
CRITICAL_BAND = 1e-6


def log1mexp(v):
    """log(1 - e^{-v}) for v > 0, stable near both endpoints."""
    v = np.asarray(v, dtype=float)
    big = v > math.log(2.0)
    safe_big = np.where(big, v, 1.0)
    safe_small = np.where(big, 1.0, v)
    return np.where(big, np.log1p(-np.exp(-safe_big)),
                    np.log(-np.expm1(-safe_small)))


def bose(v):
    """Bose factor 1/(e^v - 1) for v > 0."""
    return 1.0 / np.expm1(np.asarray(v, dtype=float))


@dataclass(frozen=True)
class GrandCanonicalPoint:
    """State (beta, mu) for a given trap; requires mu < E0 strictly."""

    beta: float
    mu: float
    trap: TrapModel

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError("beta must be positive")
        if not self.mu < ground_energy(self.trap):
            raise DomainError("mu must lie strictly below the ground energy")

    @property
    def gap(self) -> float:
        return ground_energy(self.trap) - self.mu


@dataclass(frozen=True)
class CanonicalTarget:
    """Target rescaled particle number nu at inverse temperature beta."""

    beta: float
    nu: float

    def __post_init__(self):
        if self.beta <= 0 or self.nu <= 0:
            raise DomainError("beta and nu must be positive")


def _axis_rates(beta: float, trap: TrapModel) -> np.ndarray:
    """Per-axis loop decay rates a_j = beta * hbar * omega_j * kappa_j."""
    return beta * trap.consts.hbar * axis_omega_kappa(trap)


def _split_axes(a: np.ndarray, ln_fac: float, cap: int):
    """Choose the direct-summation length L and identify slow axes.

    Fast axes have (1-e^{-a_j l})^{-1} within tolerance of 1 for l > L; the
    tail beyond L (where slow-axis factors still matter) is handled by the
    Euler-Maclaurin integral.
    """
    l_req = ln_fac / a
    slow = l_req > cap
    if not np.any(slow):
        return int(math.ceil(float(np.max(l_req)))), np.zeros(len(a), bool)
    l_fast = float(np.max(l_req[~slow])) if np.any(~slow) else 1.0
    # a longer direct stretch sharpens the Euler-Maclaurin remainder
    return int(math.ceil(min(cap, max(l_fast, 1e4)))), slow


def _em_tail(w0: float, a: np.ndarray, big_l: int, log_scale: float) -> float:
    """sum_{l>L} e^{log_scale - l w0} prod_j (1-e^{-a_j l})^{-1} by endpoint
    Euler-Maclaurin: exact integral (adaptive quadrature in log loop-length)
    plus half-term and B2 correction.

    Robust for arbitrarily small axis rates a_j: everything is evaluated in
    summed-log form and the quadrature is guided by the axis relaxation
    scales 1/a_j and the gap scale 1/w0.
    """
    from scipy import integrate

    def log_g(l):
        z = np.minimum(np.outer(a, np.atleast_1d(l)), 745.0)
        return log_scale - np.atleast_1d(l) * w0 - np.sum(log1mexp(z), axis=0)

    def g(l: float) -> float:
        val = float(log_g(l)[0])
        return math.exp(val) if val > -745.0 else 0.0

    l1 = big_l + 1.0
    l_max = min(1e306, (2000.0 + abs(log_scale)) / w0)
    if l_max <= l1:
        return g(l1)  # tail already extinguished by the gap factor
    v1, v2 = math.log(l1), math.log(l_max)
    knots = sorted({min(max(math.log(1.0 / r), v1), v2)
                    for r in list(a) + [w0] if r > 0.0})
    val, _err = integrate.quad(lambda v: g(math.exp(v)) * math.exp(v),
                               v1, v2, points=knots, limit=500,
                               epsabs=1e-300, epsrel=1e-11)
    g1 = g(l1)
    with np.errstate(over="ignore"):
        slope = w0 + float(np.sum(a / np.expm1(np.minimum(a * l1, 745.0))))
    return val + 0.5 * g1 + slope * g1 / 12.0


def _loop_number_sum(beta: float, gap: float, trap: TrapModel,
                     ctl: SeriesControl, log_scale: float = 0.0) -> float:
    """e^{log_scale} sum_{l>=1} e^{-l beta gap} prod_j (1-e^{-a_j l})^{-1}.

    The scale factor is applied inside the summation so that the rescaled
    particle number stays representable even when the slowest axis rate (and
    with it |kappa|^d) underflows any fixed floating-point window.
    """
    a = _axis_rates(beta, trap)
    d = trap.dim
    ln_fac = math.log(2.0 * d / ctl.rel_tol)
    cap = min(ctl.max_terms, 2 * 10**6)
    big_l, slow = _split_axes(a, ln_fac, cap)
    w0 = beta * gap

    total = 0.0
    for start in range(1, big_l + 1, 10**6):
        l = np.arange(start, min(start + 10**6 - 1, big_l) + 1, dtype=float)
        log_p = -np.sum(log1mexp(np.minimum(np.outer(a, l), 745.0)), axis=0)
        total += float(np.sum(np.exp(log_scale - l * w0 + log_p)))

    if not np.any(slow):
        total += math.exp(log_scale - (big_l + 1) * w0) / (-math.expm1(-w0))
    else:
        total += _em_tail(w0, a, big_l, log_scale)
    return total


def nu_rescaled(pt: GrandCanonicalPoint, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Rescaled particle number nu = |kappa|^d sum_l z^l Tr G(l beta)."""
    trap = pt.trap
    log_scale = trap.dim * math.log(trap.kappa_abs)
    return _loop_number_sum(pt.beta, pt.gap, trap, ctl, log_scale)


def nu_eigen_sum(pt: GrandCanonicalPoint, n_max: int = 400) -> float:
    """Eigenvalue-sum form of nu, truncated at per-axis quantum number n_max.

    Independent cross-check of the loop form; exact up to the truncation tail
    (geometric with per-axis ratio e^{-a_j n_max}).
    """
    beta, trap = pt.beta, pt.trap
    a = _axis_rates(beta, trap)
    w0 = beta * pt.gap
    if isinstance(trap, Isotropic):
        n = np.arange(0, n_max + 1, dtype=float)
        if trap.d == 1:
            deg = np.ones_like(n)
        elif trap.d == 2:
            deg = n + 1.0
        else:
            deg = (n + 1.0) * (n + 2.0) / 2.0
        val = float(np.sum(deg * bose(w0 + a[0] * n)))
    else:
        grids = np.meshgrid(*[np.arange(0, n_max + 1, dtype=float)] * 3,
                            indexing="ij", sparse=True)
        e = w0 + sum(a[j] * grids[j] for j in range(3))
        val = float(np.sum(bose(e)))
    return trap.kappa_abs ** trap.dim * val


def grand_potential(pt: GrandCanonicalPoint, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Grand-canonical potential per the loop-trace series
    Omega = -(1/beta) sum_l (z^l / l) Tr G(l beta).

    Writes Tr G(l beta) = e^{-E0 l beta} P_l with P_l -> 1 and resums the
    P_l = 1 part exactly as (1/beta) log(1 - e^{-beta Delta}).
    """
    beta, trap = pt.beta, pt.trap
    a = _axis_rates(beta, trap)
    ln_fac = math.log(2.0 * trap.dim / ctl.rel_tol)
    big_l = int(math.ceil(float(np.max(ln_fac / a))))
    if big_l > ctl.max_terms:
        raise ConvergenceError(
            "grand_potential: slowest axis needs more loop terms than max_terms")
    w0 = beta * pt.gap
    total = 0.0
    for start in range(1, big_l + 1, 10**6):
        l = np.arange(start, min(start + 10**6 - 1, big_l) + 1, dtype=float)
        log_p = -np.sum(log1mexp(np.outer(a, l)), axis=0)
        total += float(np.sum(np.exp(-l * w0) * np.expm1(log_p) / l))
    total += -float(log1mexp(w0))
    return -total / beta


def nu_open_trap(beta: float, mu: float, d: int,
                 consts: PhysicalConstants = PhysicalConstants(),
                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Open-trap limit nu = g_d(e^{beta mu}) / (hbar omega0 beta)^d, mu < 0."""
    if mu >= 0:
        raise DomainError("nu_open_trap requires mu < 0")
    if d not in (1, 2, 3):
        raise DomainError("d must be 1, 2 or 3")
    return polylog(float(d), math.exp(beta * mu), ctl) / \
        (consts.hbar * consts.omega0 * beta) ** d


def nu_critical(beta: float, d: int,
                consts: PhysicalConstants = PhysicalConstants(),
                ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Critical open-trap number: +inf for d=1, g_d(1)/(hbar omega0 beta)^d else."""
    if d not in (1, 2, 3):
        raise DomainError("d must be 1, 2 or 3")
    if beta <= 0:
        raise DomainError("beta must be positive")
    if d == 1:
        return math.inf
    return polylog(float(d), 1.0, ctl) / (consts.hbar * consts.omega0 * beta) ** d


def _nu_critical_trap(beta: float, trap: TrapModel,
                      ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """nu_c with the trap's effective omega0 (geometric mean for anisotropic)."""
    d = trap.dim
    if d == 1:
        return math.inf
    return polylog(float(d), 1.0, ctl) / (trap.consts.hbar * trap.omega0 * beta) ** d


def nu_m(beta: float, trap: TrapModel, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Second critical number of the quasi-1D model:
    nu_c + omega_c^2/(hbar beta omega0^3) with omega_c = omega_perp kappa_c."""
    if not isinstance(trap, Quasi1D):
        raise ModelError("nu_m is defined for the Quasi1D model only")
    omega_c = trap.omega_perp * trap.kappa_c
    return _nu_critical_trap(beta, trap, ctl) + \
        omega_c**2 / (trap.consts.hbar * beta * trap.omega0**3)


def solve_gap(target: CanonicalTarget, trap: TrapModel,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Invert nu(mu) = target.nu for the gap Delta = E0 - mu > 0.

    Bisects on log(Delta) over [1e-300*E0, E0 + 50/beta]; the gap (not mu)
    is the primary unknown because deep in the condensed regimes Delta is
    exponentially small and would be lost entirely to rounding in E0 - mu.
    """
    beta, nu = target.beta, target.nu
    e0 = ground_energy(trap)
    log_scale = trap.dim * math.log(trap.kappa_abs)

    def f(log_delta: float) -> float:
        return _loop_number_sum(beta, math.exp(log_delta), trap, ctl, log_scale) - nu

    lo = math.log(1e-300 * e0)
    hi = math.log(e0 + 50.0 / beta)
    f_lo, f_hi = f(lo), f(hi)
    if f_lo < 0.0 or f_hi > 0.0:
        raise BracketError(
            f"nu={nu} not bracketed by the gap window [{math.exp(lo)}, {math.exp(hi)}]")
    from scipy import optimize
    root = optimize.brentq(f, lo, hi, xtol=1e-12, rtol=8.9e-16, maxiter=200)
    return math.exp(root)


def solve_mu(target: CanonicalTarget, trap: TrapModel,
             ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """mu = E0 - solve_gap.  Note this difference rounds to E0 once the gap
    falls below E0's floating-point resolution; gap-sensitive work should use
    solve_gap directly."""
    return ground_energy(trap) - solve_gap(target, trap, ctl)


def occupation(target: CanonicalTarget, trap: TrapModel, s,
               ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Occupation |kappa|^d / (e^{beta(E_s - mu)} - 1) at the solved mu."""
    gap = solve_gap(target, trap, ctl)
    s = tuple(int(v) for v in s)
    if len(s) != trap.dim or any(v < 0 for v in s):
        eigenvalue(trap, s)  # delegate the error reporting
    wk = axis_omega_kappa(trap)
    excite = trap.consts.hbar * float(np.dot(wk, np.asarray(s, dtype=float)))
    w = target.beta * (gap + excite)
    return trap.kappa_abs ** trap.dim * float(bose(w))


def _li2_exp(v: float, ctl: SeriesControl) -> float:
    """Li_2(e^{-v}) for v > 0 (small-v expansion below 0.05)."""
    if v < 0.05:
        return _ZETA2 + v * (math.log(v) - 1.0) - v * v / 4.0 + v**3 / 72.0
    return polylog(2.0, math.exp(-v), ctl)


def _bose_range_sum(u0: float, a: float, n0: int, n1: int,
                    ctl: SeriesControl, weight_linear: bool = False) -> float:
    """sum_{n=n0}^{n1} w(n) / (e^{u0 + a n} - 1), w(n) = 1 or n+1.

    Direct for short ranges; Euler-Maclaurin with the exact antiderivatives
    int bose = log(1-e^{-v}) and int v*bose = -[ -v log(1-e^{-v}) + Li2(e^{-v}) ]
    for ranges too long to enumerate.
    """
    if n1 < n0:
        return 0.0
    if n1 - n0 + 1 <= 500_000:
        n = np.arange(n0, n1 + 1, dtype=float)
        t = bose(u0 + a * n)
        if weight_linear:
            t = (n + 1.0) * t
        return float(np.sum(t))
    # direct head so that by the EM stretch f varies slowly per unit step
    head = _bose_range_sum(u0, a, n0, n0 + 99_999, ctl, weight_linear)
    n0 = n0 + 100_000
    v1 = u0 + a * n0
    v2 = u0 + a * n1
    f1, f2 = float(bose(v1)), float(bose(v2))
    # B2 endpoint terms (a/12) f' with f' = -f(1+f); a*f first to stay finite
    t1 = -(a * f1) * (1.0 + f1) / 12.0
    t2 = -(a * f2) * (1.0 + f2) / 12.0
    s_plain = (float(log1mexp(v2)) - float(log1mexp(v1))) / a \
        + 0.5 * (f1 + f2) + (t2 - t1)
    if not weight_linear:
        return head + s_plain
    # sum (n+1) f = (1/a) [ sum v_n f(v_n) - (u0 - a) sum f(v_n) ]
    int_vf = (_tail2(v1, ctl) - _tail2(v2, ctl)) / a
    g1, g2 = v1 * f1, v2 * f2
    tg1 = (a * f1) / 12.0 + v1 * t1
    tg2 = (a * f2) / 12.0 + v2 * t2
    s_vf = int_vf + 0.5 * (g1 + g2) + (tg2 - tg1)
    return head + (s_vf - (u0 - a) * s_plain) / a


def _tail2(v: float, ctl: SeriesControl) -> float:
    """int_v^inf t bose(t) dt = -v log(1-e^{-v}) + Li2(e^{-v})."""
    return -v * float(log1mexp(v)) + _li2_exp(v, ctl)


def gbec_band_sum(target: CanonicalTarget, trap: TrapModel, epsilon: float,
                  ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Sum of occupations over the band 0 < sum_j kappa_j s_j <= epsilon
    (ground state excluded)."""
    if not (0.0 < epsilon <= 1.0):
        raise DomainError("epsilon must lie in (0, 1]")
    beta = target.beta
    gap = solve_gap(target, trap, ctl)
    a = _axis_rates(beta, trap)
    kap = np.array(trap.kappas)
    scale = trap.kappa_abs ** trap.dim
    w0 = beta * gap

    if isinstance(trap, Isotropic):
        n_hi = int(math.floor(epsilon / kap[0]))
        if n_hi < 1:
            return 0.0
        n = np.arange(1, n_hi + 1, dtype=float)
        if trap.d == 1:
            deg = np.ones_like(n)
        elif trap.d == 2:
            deg = n + 1.0
        else:
            deg = (n + 1.0) * (n + 2.0) / 2.0
        return scale * float(np.sum(deg * bose(w0 + a[0] * n)))

    total = 0.0
    if isinstance(trap, Quasi1D):
        # fast perpendicular pair (kappa_perp = kappa), slow axis 1
        for n_perp in range(int(math.floor(epsilon / kap[1])) + 1):
            s1_hi = int(math.floor((epsilon - kap[1] * n_perp) / kap[0]))
            s1_lo = 1 if n_perp == 0 else 0
            inner = _bose_range_sum(w0 + a[1] * n_perp, float(a[0]),
                                    s1_lo, s1_hi, ctl)
            total += (n_perp + 1) * inner
    elif isinstance(trap, Quasi2D):
        for s1 in range(int(math.floor(epsilon / kap[0])) + 1):
            n_hi = int(math.floor((epsilon - kap[0] * s1) / kap[1]))
            n_lo = 1 if s1 == 0 else 0
            if n_lo == 1 and n_hi >= 1:
                # weighted helper counts from 0; subtract the n=0 term
                inner = _bose_range_sum(w0 + a[0] * s1, float(a[1]),
                                        0, n_hi, ctl, weight_linear=True)
                inner -= float(bose(w0 + a[0] * s1))
            else:
                inner = _bose_range_sum(w0 + a[0] * s1, float(a[1]),
                                        n_lo, n_hi, ctl, weight_linear=True)
            total += inner
    else:  # pragma: no cover
        raise ModelError("unsupported trap model")
    return scale * total


def mu_open_trap(beta: float, nu: float, d: int,
                 consts: PhysicalConstants = PhysicalConstants(),
                 omega0: float | None = None,
                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Subcritical open-trap chemical potential mu0 < 0 solving
    g_d(e^{beta mu}) = nu (hbar omega0 beta)^d."""
    if d not in (1, 2, 3):
        raise DomainError("d must be 1, 2 or 3")
    w0 = consts.omega0 if omega0 is None else omega0
    rhs = nu * (consts.hbar * w0 * beta) ** d
    if d == 1:
        return math.log(-math.expm1(-rhs)) / beta
    if rhs >= polylog(float(d), 1.0, ctl):
        raise RegimeError("nu at or above nu_c: no subcritical open-trap mu")
    lo, hi = -745.0, 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if polylog(float(d), math.exp(mid), ctl) < rhs:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14 * max(1.0, abs(lo)):
            break
    return 0.5 * (lo + hi) / beta


def gap_asymptotic(target: CanonicalTarget, trap: TrapModel,
                   ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Leading-order closed-form prediction for the gap E0 - mu at the
    trap's kappa, per regime.  Raises RegimeError within the critical band."""
    beta, nu = target.beta, target.nu
    nu_c = _nu_critical_trap(beta, trap, ctl)
    h = trap.consts.hbar

    def check_away(value, name):
        if math.isfinite(value) and abs(nu - value) < CRITICAL_BAND * value:
            raise RegimeError(f"nu within the critical band of {name}")

    check_away(nu_c, "nu_c")
    if isinstance(trap, Isotropic):
        if trap.d == 1 or nu < nu_c:
            return -mu_open_trap(beta, nu, trap.dim, trap.consts,
                                 omega0=trap.omega0, ctl=ctl)
        return trap.kappa ** trap.d / (beta * (nu - nu_c))
    if isinstance(trap, Quasi1D):
        numm = nu_m(beta, trap, ctl)
        check_away(numm, "nu_m")
        if nu < nu_c:
            return -mu_open_trap(beta, nu, 3, trap.consts,
                                 omega0=trap.omega0, ctl=ctl)
        if nu < numm:
            return math.exp(-h * trap.omega1 * beta * (nu - nu_c)
                            / trap.kappa**2) / beta
        k1, kp, _ = trap.kappas
        return k1 * kp**2 / (beta * (nu - numm))
    if isinstance(trap, Quasi2D):
        if nu < nu_c:
            return -mu_open_trap(beta, nu, 3, trap.consts,
                                 omega0=trap.omega0, ctl=ctl)
        k1, kp, _ = trap.kappas
        return k1 * kp**2 / (beta * (nu - nu_c))
    raise ModelError("unsupported trap model")  # pragma: no cover


def mu_asymptotic(target: CanonicalTarget, trap: TrapModel,
                  ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """E0 - gap_asymptotic; subject to the same rounding caveat as solve_mu."""
    return ground_energy(trap) - gap_asymptotic(target, trap, ctl)
