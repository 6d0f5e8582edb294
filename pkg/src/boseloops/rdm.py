"""Reduced density matrix of the trapped ideal Bose gas.

Loop-series evaluation with a certified split: once every per-axis Mehler
factor has relaxed onto the ground-state dyad (loop length beyond L*), the
remainder is an exact geometric series in e^{-beta(E0-mu)} and is summed in
closed form.  Equivalently, the full series equals

    rdm(x,y) = noncondensate(x,y) + Psi0(x)Psi0(y) / (e^{beta(E0-mu)} - 1),

where the noncondensate part sums the dyad-subtracted kernels and converges
after ~L* terms even arbitrarily close to criticality.  The same engine
evaluates arbitrary loop-length windows, which is what the short/meso/macro
decompositions and the anisotropic plateau sums are made of.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import (ConvergenceError, DomainError, ModelError, OriginError,
                     RegimeError, TruncationWarning)
from .kernels import (Isotropic, TrapModel, _check_points, axis_omega_kappa,
                      ground_energy, ground_state_product,
                      log_ground_state_product)
from .specfun import (DEFAULT_CONSTANTS, DEFAULT_CONTROL, PhysicalConstants,
                      SeriesControl, de_broglie, hermite_eigen_table, polylog)
from .thermo import (CRITICAL_BAND, CanonicalTarget, _nu_critical_trap, bose,
                     log1mexp, mu_open_trap, solve_gap)

_DIRECT_CAP = 2_000_000
_DIRECT_HEAD = 300_000
_CRAMER = 1.0865


def _axis_geometry(x, y, trap: TrapModel):
    """Per-axis oscillator constants c_j = m omega_j kappa_j / hbar and the
    squared sum/difference coordinates."""
    x, y = _check_points(x, y, trap)
    wk = axis_omega_kappa(trap)
    c = trap.consts.mass * wk / trap.consts.hbar
    return c, (x + y) ** 2, (x - y) ** 2, trap.consts.hbar * wk


def _delta_exponent(l, beta, c, sq_plus, sq_minus, hw):
    """log[ K(l beta) / dyad ] as a function of loop length l (vectorized).

    Per axis, with u = hbar omega kappa l beta:
      -0.5 log(1-e^{-2u}) + (c/2)[ (x+y)^2/(e^u+1) - (x-y)^2/(e^u-1) ],
    which decays like e^{-u}; the cancellation against the dyad is done
    analytically so no large logs are ever subtracted numerically.
    """
    l = np.asarray(l, dtype=float)
    out = np.zeros_like(l)
    for j in range(len(c)):
        u = beta * hw[j] * l
        eu = np.exp(-u)
        with np.errstate(over="ignore"):
            sm = 1.0 / np.expm1(np.minimum(u, 745.0))
        sp = eu / (1.0 + eu)
        out = out - 0.5 * log1mexp(np.minimum(2.0 * u, 1490.0)) \
            + 0.5 * c[j] * (sq_plus[j] * sp - sq_minus[j] * sm)
    return out


def _relax_length(beta, c, sq_plus, sq_minus, hw, dim, rel_tol) -> int:
    """Loop length beyond which every dyad-subtracted factor is below
    rel_tol/(3d) in log, so the summand is negligible relative to the dyad."""
    worst = 1.0
    for j in range(dim):
        amp = 1.0 + c[j] * (sq_plus[j] + sq_minus[j])
        u_star = math.log(max(math.e, amp * 3.0 * dim / rel_tol))
        worst = max(worst, u_star / (beta * hw[j]))
    return int(math.ceil(worst))


def _noncond_range_sum(x, y, beta: float, gap: float, trap: TrapModel,
                       l_lo: int, l_hi, ctl: SeriesControl) -> float:
    """sum over the loop-length window [l_lo, l_hi] of
    e^{-l beta gap} [K(x,y; l beta) - dyad], dyad = Psi0(x)Psi0(y).

    l_hi may be None (infinite window).  Terms beyond the relaxation length
    L* contribute below rel_tol relative to the macroscopic tail and are
    dropped; windows too long to enumerate are bridged by adaptive quadrature
    of the (smooth, analytic in l) summand in log-loop-length.
    """
    if l_lo < 1:
        raise DomainError("loop lengths start at 1")
    c, sq_plus, sq_minus, hw = _axis_geometry(x, y, trap)
    log_dyad = log_ground_state_product(x, y, trap)
    w0 = beta * gap

    l_star = _relax_length(beta, c, sq_plus, sq_minus, hw, trap.dim, ctl.rel_tol)
    upper = l_star if l_hi is None else min(l_hi, l_star)
    if w0 > 0.0:
        # headroom covers the (logarithmically growing) subtracted exponent
        cut = (1500.0 - min(log_dyad, 0.0)) / w0
        if cut < 8e18:
            upper = min(upper, l_lo + int(cut) + 1)
    if upper < l_lo:
        return 0.0

    def chunk_sum(a: int, b: int) -> float:
        total = 0.0
        for start in range(a, b + 1, 10**6):
            l = np.arange(start, min(start + 10**6 - 1, b) + 1, dtype=float)
            dlt = _delta_exponent(l, beta, c, sq_plus, sq_minus, hw)
            base = -l * w0 + log_dyad
            # far in the Gaussian tail the dyad underflows while the kernel
            # itself is fine; switch to the summed-exponent form there
            big = dlt > 35.0
            safe = np.where(big, 0.0, dlt)
            vals = np.where(big, np.exp(base + dlt),
                            np.exp(base) * np.expm1(safe))
            total += float(np.sum(vals))
        return total

    if upper - l_lo + 1 <= _DIRECT_CAP:
        return chunk_sum(l_lo, upper)

    head_end = l_lo + _DIRECT_HEAD - 1
    total = chunk_sum(l_lo, head_end)

    def integrand(v: float) -> float:
        l = math.exp(v)
        dlt = float(_delta_exponent(l, beta, c, sq_plus, sq_minus, hw))
        base = -l * w0 + log_dyad + v
        if dlt > 35.0:
            return math.exp(base + dlt)
        return math.exp(base) * math.expm1(dlt)

    v1 = math.log(head_end + 0.5)
    v2 = math.log(upper + 0.5)
    val, _err = integrate.quad(integrand, v1, v2, limit=400,
                               epsabs=0.0, epsrel=1e-9)
    return total + val


def _geometric_window(w0: float, l_lo: int, l_hi) -> float:
    """sum_{l=l_lo}^{l_hi} e^{-l w0}, l_hi None meaning infinity."""
    head = math.exp(-l_lo * w0) / (-math.expm1(-w0))
    if l_hi is None:
        return head
    if l_hi < l_lo:
        return 0.0
    return head * (-math.expm1(-(l_hi - l_lo + 1) * w0))


def rdm_loops(x, y, target: CanonicalTarget, trap: TrapModel,
              ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Reduced density matrix r(x,y) by the loop series at the solved mu."""
    gap = solve_gap(target, trap, ctl)
    dyad = ground_state_product(x, y, trap)
    noncond = _noncond_range_sum(x, y, target.beta, gap, trap, 1, None, ctl)
    return noncond + dyad * float(bose(target.beta * gap))


def noncondensate(x, y, target: CanonicalTarget, trap: TrapModel,
                  ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """rdm_loops minus the ground-state term
    Psi0(x)Psi0(y)/(e^{beta(E0-mu)}-1)."""
    gap = solve_gap(target, trap, ctl)
    return _noncond_range_sum(x, y, target.beta, gap, trap, 1, None, ctl)


def rdm_rescaled(x, y, target: CanonicalTarget, trap: TrapModel,
                 ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """|kappa|^{d/2} r(x,y): the combination with a finite open-trap limit
    above criticality."""
    return trap.kappa_abs ** (trap.dim / 2.0) * rdm_loops(x, y, target, trap, ctl)


def rdm_eigen(x, y, target: CanonicalTarget, trap: TrapModel,
              s_max: int = 200, ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Eigenfunction-expansion form r(x,y) = sum_s psi_s(x) psi_s(y) n_s,
    truncated at per-axis quantum number s_max.

    Independent of the loop representation; the truncation tail is bounded
    with the uniform sup bound on normalized oscillator eigenfunctions and a
    TruncationWarning is emitted if the bound exceeds ctl.abs_tol.
    """
    xv, yv = _check_points(x, y, trap)
    beta = target.beta
    w0 = beta * solve_gap(target, trap, ctl)
    hw = trap.consts.hbar * axis_omega_kappa(trap)
    a = beta * hw
    consts = trap.consts

    prods = []
    for j in range(trap.dim):
        kappa_eff = hw[j] / (consts.hbar * consts.omega0)
        px = hermite_eigen_table(s_max, float(xv[j]), kappa_eff, consts)
        py = hermite_eigen_table(s_max, float(yv[j]), kappa_eff, consts)
        prods.append(px * py)

    if trap.dim == 1:
        s = np.arange(0, s_max + 1, dtype=float)
        val = float(np.sum(prods[0] * bose(w0 + a[0] * s)))
    else:
        s = np.arange(0, s_max + 1, dtype=float)
        shapes = [(-1, 1, 1), (1, -1, 1), (1, 1, -1)][: trap.dim]
        e = w0 + sum(a[j] * s.reshape(shapes[j]) for j in range(trap.dim))
        weights = bose(e)
        p = prods[0].reshape(shapes[0])
        for j in range(1, trap.dim):
            p = p * prods[j].reshape(shapes[j])
        val = float(np.sum(p * weights))

    c = consts.mass * hw / consts.hbar
    sup = _CRAMER**2 / math.sqrt(math.pi) * float(np.prod(np.sqrt(c)))
    a_min = float(np.min(a))
    tail_bound = sup * trap.dim * float(bose(w0 + a_min * (s_max + 1))) \
        / float(np.prod(-np.expm1(-a)))
    if tail_bound > ctl.abs_tol:
        warnings.warn(TruncationWarning(tail_bound))
    return val


@dataclass(frozen=True)
class LoopDecomposition:
    """Exact three-way partition of the loop series at the short and macro
    cutoffs; total = short_sum + meso_sum + macro_sum in that order."""

    short_cutoff: int
    macro_cutoff: float  # integer-valued, or math.inf when beyond 2^62
    short_sum: float
    meso_sum: float
    macro_sum: float
    total: float


def _macro_cutoff(trap: TrapModel, ctl: SeriesControl) -> float:
    """Model-specific macroscopic cutoff M; math.inf once it exceeds 2^62."""
    from .kernels import Quasi1D, Quasi2D

    if isinstance(trap, Isotropic):
        return float(math.floor(trap.kappa ** (-ctl.sigma)))
    sigma2 = 0.0 if ctl.sigma2 is None else ctl.sigma2
    if isinstance(trap, Quasi1D):
        log_m = trap.kappa_c**2 / trap.kappa**2 - sigma2 * math.log(trap.kappa)
    elif isinstance(trap, Quasi2D):
        log_m = 2.0 * math.sqrt(trap.kappa_c / trap.kappa) \
            - sigma2 * math.log(trap.kappa)
    else:  # pragma: no cover
        raise ModelError("unsupported trap model")
    if log_m >= 62.0 * math.log(2.0):
        return math.inf
    return float(math.floor(math.exp(log_m)))


def loop_decompose(x, y, target: CanonicalTarget, trap: TrapModel,
                   ctl: SeriesControl = DEFAULT_CONTROL) -> LoopDecomposition:
    """Split the loop series at N = floor(kappa^-sigma) (short/long) and at
    the model-specific macroscopic cutoff M (meso/macro).

    Isotropic traps use the two-way split (M = N, empty meso window).  Each
    window's raw sum is evaluated as its dyad-subtracted sum plus the exact
    geometric dyad window, so the partition identity holds by construction.
    """
    if isinstance(trap, Isotropic) and not 1.0 < ctl.sigma < 1.5:
        raise DomainError("isotropic short cutoff requires 1 < sigma < 3/2")
    if ctl.sigma <= 0:
        raise DomainError("sigma must be positive")
    beta = target.beta
    gap = solve_gap(target, trap, ctl)
    w0 = beta * gap
    dyad = ground_state_product(x, y, trap)

    n_short = int(math.floor(trap.kappa ** (-ctl.sigma)))
    m_macro = _macro_cutoff(trap, ctl)
    if math.isfinite(m_macro):
        m_macro = max(m_macro, float(n_short))

    def window(lo: int, hi) -> float:
        if hi is not None and hi < lo:
            return 0.0
        sub = _noncond_range_sum(x, y, beta, gap, trap, lo, hi, ctl)
        return sub + dyad * _geometric_window(w0, lo, hi)

    short_sum = window(1, n_short)
    if math.isinf(m_macro):
        meso_sum = window(n_short + 1, None)
        macro_sum = 0.0
    else:
        meso_sum = window(n_short + 1, int(m_macro))
        macro_sum = window(int(m_macro) + 1, None)
    total = short_sum + meso_sum + macro_sum
    return LoopDecomposition(n_short, m_macro, short_sum, meso_sum,
                             macro_sum, total)


def open_trap_rdm(x, y, beta: float, nu: float, d: int,
                  ctl: SeriesControl = DEFAULT_CONTROL,
                  consts: PhysicalConstants = DEFAULT_CONSTANTS) -> float:
    """Open-trap (kappa -> 0) limit of the reduced density matrix.

    Subcritical: lambda^-d sum_l l^{-d/2} e^{l beta mu0} e^{-pi|x-y|^2/(lambda^2 l)}
    with mu0 < 0 the open-trap chemical potential.  Above nu_c (d=3), or at and
    above nu_c (d=2), the limit is +inf; d=3 exactly at nu_c stays finite.
    """
    if d not in (1, 2, 3):
        raise DomainError("d must be 1, 2 or 3")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    if xv.shape != (d,) or yv.shape != (d,):
        raise DomainError(f"points must have dimension {d}")
    lam = de_broglie(beta, consts)
    q = math.pi * float(np.sum((xv - yv) ** 2)) / lam**2

    if d >= 2:
        nu_c = polylog(float(d), 1.0, ctl) / (consts.hbar * consts.omega0 * beta) ** d
        if nu > nu_c or (d == 2 and nu >= nu_c * (1.0 - CRITICAL_BAND)):
            return math.inf
        if d == 3 and abs(nu - nu_c) < CRITICAL_BAND * nu_c:
            z = 1.0
        else:
            z = math.exp(beta * mu_open_trap(beta, nu, d, consts, ctl=ctl))
    else:
        z = math.exp(beta * mu_open_trap(beta, nu, 1, consts, ctl=ctl))

    half = 0.5 * d
    total = 0.0
    n = 0
    chunk = 8192
    log_z = math.log(z) if z < 1.0 else 0.0
    while n < 100 * ctl.max_terms:
        l = np.arange(n + 1, n + chunk + 1, dtype=float)
        total += float(np.sum(np.exp(l * log_z - q / l) / l**half))
        n += chunk
        if z < 1.0:
            bound = math.exp((n + 1) * log_z) / ((n + 1) ** half * (1.0 - z))
            if bound < ctl.abs_tol:
                break
        else:
            # z = 1 (d=3 at nu_c): Euler-Maclaurin tail via the closed-form
            # integral int_N^inf l^{-3/2} e^{-q/l} dl
            if n >= 200_000:
                n_half = n + 0.5
                if q > 0.0:
                    from scipy.special import erf
                    tail = math.sqrt(math.pi / q) * erf(math.sqrt(q / n_half))
                else:
                    tail = 2.0 / math.sqrt(n_half)
                total += tail
                break
        chunk = min(2 * chunk, 2 * 10**6)
    else:
        raise ConvergenceError("open-trap series did not converge")
    return total / lam**d


def divergence_law(beta: float, nu: float, d: int,
                   consts: PhysicalConstants = DEFAULT_CONSTANTS,
                   ctl: SeriesControl = DEFAULT_CONTROL) -> str | None:
    """Tag describing how the open-trap rdm diverges, or None if finite."""
    if d == 1:
        return None
    nu_c = polylog(float(d), 1.0, ctl) / (consts.hbar * consts.omega0 * beta) ** d
    if d == 2 and nu >= nu_c * (1.0 - CRITICAL_BAND):
        return "logarithmic-in-kappa"
    if d == 3 and nu > nu_c * (1.0 + CRITICAL_BAND):
        return "power-law-in-kappa"
    return None


def local_density_scaled(x, delta: float, target: CanonicalTarget,
                         trap: TrapModel, ctl: SeriesControl = DEFAULT_CONTROL,
                         rescaled: bool = False) -> float:
    """Diagonal density at the dilated point x kappa^-delta (isotropic traps).

    With rescaled=True the |kappa|^{d/2}-rescaled matrix is evaluated instead.
    """
    if not isinstance(trap, Isotropic):
        raise ModelError("delta-scaled densities are defined for isotropic traps")
    if not 0.0 <= delta <= 1.0:
        raise DomainError("delta must lie in [0, 1]")
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.shape != (trap.dim,):
        raise DomainError(f"point must have dimension {trap.dim}")
    if delta > 0.0 and float(np.max(np.abs(xv))) == 0.0:
        raise OriginError("scaled density undefined at the origin for delta > 0")
    point = xv * trap.kappa ** (-delta)
    if rescaled:
        return rdm_rescaled(point, point, target, trap, ctl)
    return rdm_loops(point, point, target, trap, ctl)


def scaled_density_limit(x, delta: float, target: CanonicalTarget, d: int,
                         consts: PhysicalConstants = DEFAULT_CONSTANTS,
                         ctl: SeriesControl = DEFAULT_CONTROL,
                         rescaled: bool = False) -> float | None:
    """Closed-form kappa->0 limit of the delta-scaled density.

    Returns None where no limit is claimed (d=2 noncondensate window).
    Raises RegimeError inside the critical band.
    """
    if not 0.0 <= delta <= 1.0:
        raise DomainError("delta must lie in [0, 1]")
    beta, nu = target.beta, target.nu
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    lam = de_broglie(beta, consts)
    v_x = 0.5 * consts.mass * consts.omega0**2 * float(np.sum(xv**2))
    nu_c = math.inf if d == 1 else \
        polylog(float(d), 1.0, ctl) / (consts.hbar * consts.omega0 * beta) ** d

    if math.isfinite(nu_c) and abs(nu - nu_c) < CRITICAL_BAND * nu_c:
        raise RegimeError("nu inside the critical band")
    if nu < nu_c:
        if rescaled:
            return 0.0
        mu0 = mu_open_trap(beta, nu, d, consts, ctl=ctl)
        z = math.exp(beta * (mu0 - (v_x if delta == 1.0 else 0.0)))
        return polylog(d / 2.0, z, ctl) / lam**d

    # supercritical
    if rescaled:
        amp = 2.0 ** (d / 2.0) * (consts.hbar * consts.omega0 * beta) ** (d / 2.0) \
            * (nu - nu_c) / lam**d
        if delta < 0.5:
            return amp
        if delta == 0.5:
            return amp * math.exp(-consts.mass * consts.omega0
                                  * float(np.sum(xv**2)) / consts.hbar)
        return 0.0
    if d == 2 and delta < 1.0:
        return None
    if delta == 1.0:
        return polylog(d / 2.0, math.exp(-beta * v_x), ctl) / lam**d
    if d == 3 and delta > 0.5:
        return polylog(1.5, 1.0, ctl) / lam**3
    return math.inf


def semiclassical_density(x, beta: float, mu: float, d: int,
                          consts: PhysicalConstants = DEFAULT_CONSTANTS,
                          ctl: SeriesControl = DEFAULT_CONTROL) -> float:
    """Semiclassical local density lambda^-d g_{d/2}(e^{beta(mu - V(x))})
    with V(x) = m omega0^2 |x|^2 / 2."""
    xv = np.atleast_1d(np.asarray(x, dtype=float))
    if xv.shape != (d,):
        raise DomainError(f"point must have dimension {d}")
    v_x = 0.5 * consts.mass * consts.omega0**2 * float(np.sum(xv**2))
    if mu - v_x >= 0.0:
        raise DomainError("semiclassical density requires mu - V(x) < 0")
    lam = de_broglie(beta, consts)
    return polylog(d / 2.0, math.exp(beta * (mu - v_x)), ctl) / lam**d


@dataclass(frozen=True)
class BarometricRadii:
    """Mean square single-axis radii of the thermal (delta=1) and condensate
    (delta=1/2, rescaled) open-trap profiles, plus the two candidate closed
    forms for their quotient."""

    r2_thermal: float
    r2_condensate: float
    ratio: float
    ratio_single_beta: float
    ratio_double_beta: float
    printed_form_consistent: bool


def barometric_radii(target: CanonicalTarget, trap: TrapModel, d: int | None = None,
                     ctl: SeriesControl = DEFAULT_CONTROL) -> BarometricRadii:
    """<x_j^2> of the two supercritical open-trap profiles by quadrature.

    Thermal profile: g_{d/2}(e^{-beta V(r)}); condensate profile:
    e^{-m omega0 r^2 / hbar}.  Requires d in {2,3} and nu > nu_c.
    """
    consts = trap.consts
    if d is None:
        d = trap.dim
    if d != trap.dim:
        raise DomainError("d must match the trap dimension")
    if d not in (2, 3):
        raise DomainError("barometric radii require d in {2, 3}")
    beta, nu = target.beta, target.nu
    nu_c = _nu_critical_trap(beta, trap, ctl)
    if not nu > nu_c:
        raise RegimeError("barometric radii require nu > nu_c")
    omega0 = trap.omega0
    bq = 0.5 * beta * consts.mass * omega0**2

    def thermal(r: float) -> float:
        t = max(bq * r * r, 1e-300)
        if d == 2:
            # g_1(e^-t) = -log(1 - e^-t), integrable at the origin
            return -float(log1mexp(t))
        return polylog(1.5, math.exp(-t), ctl)

    def moment(profile, power: int) -> float:
        val, _ = integrate.quad(lambda r: r**power * profile(r), 0.0, np.inf,
                                limit=300, epsabs=1e-12, epsrel=1e-10)
        return val

    r2_th = moment(thermal, d + 1) / (d * moment(thermal, d - 1))
    ac = consts.mass * omega0 / consts.hbar

    def cond(r: float) -> float:
        return math.exp(-ac * r * r)

    r2_co = moment(cond, d + 1) / (d * moment(cond, d - 1))
    ratio = r2_th / r2_co
    zr = polylog(float(d + 1), 1.0, ctl) / polylog(float(d), 1.0, ctl)
    single = 2.0 * zr / (consts.hbar * omega0 * beta)
    double = single / beta
    return BarometricRadii(r2_th, r2_co, ratio, single, double,
                           abs(ratio - double) <= 1e-6 * abs(ratio))
