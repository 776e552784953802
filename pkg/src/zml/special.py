"""Riemann-Siegel phase, Hardy's Z, its derivative, and zeta near the line.

Everything here feeds the zero engine, so the phases are carried in
double-word arithmetic: at height t the quantities theta(t) and t*log(n)
reach ~1e8 while the downstream zero ordinates must be good to ~1e-10,
which is more than a plain double's 16 digits can bridge.

Evaluation strategy for Z(t) = e^{i theta(t)} zeta(1/2 + it):

* t < 1000   Euler-Maclaurin for zeta(1/2+it) with N = max(50, 2t) terms
             and a 10-term Bernoulli tail, rotated by e^{i theta}.  Error
             well below 1e-12.
* t >= 1000  Riemann-Siegel main sum over n <= floor(sqrt(t/2pi)) plus
             the four classical remainder corrections C_0..C_3 built from
             derivatives of Psi(p) = cos(2pi(p^2 - p - 1/16))/cos(2pi p).
             Remainder after C_3 is ~0.03 * t^{-9/4}: below 6e-9 at
             t = 1000 and shrinking fast.

The Taylor coefficients of the entire function Psi around p = 1/2 are
generated once per process by contour quadrature on the circle |u| = 2
in double-word complex arithmetic, then differentiated termwise.  This
avoids copying tabulated constants and gives an internal cross-check:
the series must reproduce the closed form of Psi wherever cos(2pi p) is
not small.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from typing import Tuple

import numpy as np
from scipy.special import loggamma as _loggamma

from . import ddmath as dd
from .ddmath import ExtComplex, ExtReal, as_ext

# Switch height between the Euler-Maclaurin and Riemann-Siegel paths of Z.
EM_SWITCH = 1000.0
# Euler-Maclaurin is the default zeta path up to this height.
ZETA_EM_MAX = 1.0e4

_THETA_MIN = 10.0


# -- Riemann-Siegel theta ---------------------------------------------
#
# theta(t) = (t/2) log(t/2pi) - t/2 - pi/8
#            + 1/(48t) + 7/(5760 t^3) + 31/(80640 t^5)
#            + 127/(430080 t^7) + 511/(1216512 t^9) + ...
#
# The five correction terms leave a remainder below 1e-14 already at
# t = 10, far inside the 1e-10 budget.

_THETA_COEFFS = (
    Fraction(1, 48),
    Fraction(7, 5760),
    Fraction(31, 80640),
    Fraction(127, 430080),
    Fraction(511, 1216512),
)
_THETA_COEFFS_F = tuple(float(c) for c in _THETA_COEFFS)


def rs_theta(t) -> ExtReal:
    """theta(t) = Im log Gamma(1/4 + it/2) - (t/2) log(pi), t >= 10."""
    te = as_ext(t)
    if float(te) < _THETA_MIN:
        raise ValueError("rs_theta requires t >= 10 (asymptotic series)")
    half = dd.ldexp(te, -1)
    main = half * (dd.log(te) - dd.LOG_2PI) - half - dd.PI_OVER_8
    tf = float(te)
    inv_t2 = 1.0 / (tf * tf)
    corr = 0.0
    for c in reversed(_THETA_COEFFS_F):
        corr = corr * inv_t2 + c
    return main + ExtReal(corr / tf)


def rs_theta_prime(t: float) -> float:
    """theta'(t) = (1/2) log(t/2pi) + O(1/t^2), native precision."""
    return 0.5 * math.log(t / (2.0 * math.pi)) - (1.0 / 48.0) / (t * t)


# Vector double-word exp/log, needed for theta on arrays of ordinates.

_LN2_HI = 0.6931471805599453
_LN2_LO = 2.3190468138462996e-17
_INV_N_DD = [(0.0, 0.0)] + [
    (1.0 / n, float(Fraction(1, n) - Fraction(1.0 / n))) for n in range(1, 16)
]


def _v_dd_exp(ah, al):
    zero = np.zeros_like(ah)
    one = np.ones_like(ah)
    k = np.round(ah * (1.0 / _LN2_HI))
    ph, pl = dd.v_two_prod(k, _LN2_HI)
    rh, rl = dd.v_dd_sub(ah, al, ph, pl)
    rh, rl = dd.v_dd_sub(rh, rl, k * _LN2_LO, zero)
    rh, rl = rh * 0.03125, rl * 0.03125
    acch = one.copy()
    accl = zero.copy()
    for n in range(14, 0, -1):
        inv_hi, inv_lo = _INV_N_DD[n]
        th, tl = dd.v_dd_mul(rh, rl, np.full_like(ah, inv_hi),
                             np.full_like(ah, inv_lo))
        acch, accl = dd.v_dd_mul(acch, accl, th, tl)
        acch, accl = dd.v_dd_add(acch, accl, one, zero)
    for _ in range(5):
        acch, accl = dd.v_dd_mul(acch, accl, acch, accl)
    ki = k.astype(np.int64)
    return np.ldexp(acch, ki), np.ldexp(accl, ki)


def _v_dd_log(ah, al):
    y0 = np.log(ah)
    eh, el = _v_dd_exp(-y0, np.zeros_like(y0))
    ph, pl = dd.v_dd_mul(ah, al, eh, el)
    ph, pl = dd.v_dd_add(ph, pl, np.full_like(ah, -1.0), np.zeros_like(ah))
    return dd.v_dd_add(y0, np.zeros_like(y0), ph, pl)


def rs_theta_batch(t: np.ndarray, tl: np.ndarray | None = None
                   ) -> Tuple[np.ndarray, np.ndarray]:
    """Double-word theta on a vector of heights t >= 10; `tl` supplies
    optional low-order words when the ordinates themselves are
    double-word (zero refinement below the float64 ulp)."""
    t = np.asarray(t, dtype=np.float64)
    if tl is None:
        tl = np.zeros_like(t)
    lh, ll = _v_dd_log(t, tl)
    lh, ll = dd.v_dd_add(lh, ll, np.full_like(t, -dd.LOG_2PI.hi),
                         np.full_like(t, -dd.LOG_2PI.lo))
    mh, ml = dd.v_dd_mul(t * 0.5, tl * 0.5, lh, ll)
    mh, ml = dd.v_dd_sub(mh, ml, 0.5 * t, 0.5 * tl)
    mh, ml = dd.v_dd_add(mh, ml, np.full_like(t, -dd.PI_OVER_8.hi),
                         np.full_like(t, -dd.PI_OVER_8.lo))
    inv_t2 = 1.0 / (t * t)
    corr = np.zeros_like(t)
    for c in reversed(_THETA_COEFF_F_ARR):
        corr = corr * inv_t2 + c
    return dd.v_dd_add(mh, ml, corr / t, np.zeros_like(t))


_THETA_COEFF_F_ARR = np.array(_THETA_COEFFS_F)


# -- Psi Taylor series for the Riemann-Siegel remainder ----------------

_PSI_NMAX = 64
_PSI_SAMPLES = 256
_psi_coeff_cache = None


def _cos_ext_complex(z: ExtComplex) -> ExtComplex:
    """cos(x+iy) = cos x cosh y - i sin x sinh y in double-word arithmetic."""
    sx, cx = dd.sin_cos(z.re)
    ey = dd.exp(z.im)
    ey_inv = dd.div(ExtReal(1.0), ey)
    cosh = dd.ldexp(ey + ey_inv, -1)
    sinh = dd.ldexp(ey - ey_inv, -1)
    return ExtComplex(cx * cosh, -(sx * sinh))


def _psi_closed_form(p: float) -> float:
    """Psi(p) = cos(2pi(p^2 - p - 1/16))/cos(2pi p); removable poles at
    p = 1/4, 3/4 make this form unusable near those points."""
    return math.cos(2.0 * math.pi * (p * p - p - 0.0625)) / math.cos(2.0 * math.pi * p)


def _psi_taylor_coeffs() -> np.ndarray:
    """Taylor coefficients of Psi(1/2 + u) around u = 0.

    Psi is entire (the cosine zeros cancel), so the coefficients come
    from the Cauchy integral over |u| = 2, discretised with 256 points;
    aliasing and quadrature error sit far below 1e-20 for n < 64.
    """
    global _psi_coeff_cache
    if _psi_coeff_cache is not None:
        return _psi_coeff_cache
    M = _PSI_SAMPLES
    R = 2.0
    table = []
    for m in range(M):
        ang = dd.div(dd.mul_d(dd.TWO_PI, float(m)), ExtReal(float(M)))
        table.append(dd.sin_cos(ang))
    # Psi(1/2+u) = -cos(2 pi u^2 - 5 pi/8) / cos(2 pi u)
    five_pi_8 = dd.mul_d(dd.PI_OVER_8, 5.0)
    vals = []
    for m in range(M):
        s, c = table[m]
        u = ExtComplex(dd.mul_d(c, R), dd.mul_d(s, R))
        u2 = u * u
        num = _cos_ext_complex(ExtComplex(dd.TWO_PI * u2.re - five_pi_8,
                                          dd.TWO_PI * u2.im))
        den = _cos_ext_complex(ExtComplex(dd.TWO_PI * u.re, dd.TWO_PI * u.im))
        vals.append(-(num / den))
    coeffs = np.empty(_PSI_NMAX)
    for n in range(_PSI_NMAX):
        acc_re = ExtReal(0.0)
        for m in range(M):
            # accumulate Re( vals[m] * e^{-2pi i n m / M} )
            s, c = table[(n * m) % M]
            acc_re = acc_re + vals[m].re * c + vals[m].im * s
        coeffs[n] = float(acc_re) / (M * R ** n)
    _psi_coeff_cache = coeffs
    return coeffs


def _psi_deriv_matrix(orders) -> dict:
    """Taylor coefficients of Psi^{(k)}(1/2+u) for each requested k."""
    base = _psi_taylor_coeffs()
    out = {}
    for k in orders:
        n = np.arange(k, _PSI_NMAX)
        fac = np.ones_like(n, dtype=np.float64)
        for j in range(k):
            fac *= (n - j)
        out[k] = base[k:] * fac
    return out


_PSI_DERIV_ORDERS = (0, 1, 2, 3, 5, 6, 9)
_psi_deriv_cache = None


def _psi_derivs_at(p: np.ndarray) -> dict:
    """Psi^{(k)}(p) for k in _PSI_DERIV_ORDERS, vectorised over p in [0,1)."""
    global _psi_deriv_cache
    if _psi_deriv_cache is None:
        _psi_deriv_cache = _psi_deriv_matrix(_PSI_DERIV_ORDERS)
    u = np.asarray(p, dtype=np.float64) - 0.5
    out = {}
    for k, coeff in _psi_deriv_cache.items():
        acc = np.zeros_like(u)
        for c in coeff[::-1]:
            acc = acc * u + c
        out[k] = acc
    return out


# Remainder coefficients C_0..C_3 in powers of (t/2pi)^{-1/2}, following
# the classical expansion in derivatives of Psi.
_PI2 = math.pi * math.pi


def _rs_remainder(a: np.ndarray, N: np.ndarray,
                  p: np.ndarray | None = None) -> np.ndarray:
    # a carries rounding jitter ~ulp(a); refinement near zeros with small
    # |Z'| needs p smooth in t well below that, so callers may pass a
    # sharper p than a - N.
    if p is None:
        p = a - N
    d = _psi_derivs_at(p)
    c0 = d[0]
    c1 = -d[3] / (96.0 * _PI2)
    c2 = d[2] / (64.0 * _PI2) + d[6] / (18432.0 * _PI2 * _PI2)
    c3 = -d[1] / (64.0 * _PI2) - d[5] / (3840.0 * _PI2 * _PI2) \
        - d[9] / (5308416.0 * _PI2 * _PI2 * _PI2)
    inv_sqrt_a = 1.0 / np.sqrt(a)
    corr = c0 + inv_sqrt_a ** 2 * (c1 + inv_sqrt_a ** 2 * (c2 + inv_sqrt_a ** 2 * c3))
    sign = np.where(N.astype(np.int64) % 2 == 1, 1.0, -1.0)
    return sign * inv_sqrt_a * corr


# -- shared log-n table ------------------------------------------------

_logn_hi = np.zeros(1)
_logn_lo = np.zeros(1)
_rsqrt_n = np.ones(1)


def _ensure_logn(n_max: int) -> None:
    global _logn_hi, _logn_lo, _rsqrt_n
    if len(_logn_hi) > n_max:
        return
    size = max(n_max + 1, 2 * len(_logn_hi), 1024)
    hi = np.empty(size)
    lo = np.empty(size)
    hi[0] = lo[0] = 0.0
    for n in range(1, size):
        v = dd.log(ExtReal(float(n)))
        hi[n] = v.hi
        lo[n] = v.lo
    _logn_hi, _logn_lo = hi, lo
    _rsqrt_n = np.concatenate(([np.inf], 1.0 / np.sqrt(np.arange(1.0, size))))


def logn_table(n_max: int):
    """Double-word log n plus 1/sqrt(n) for n = 0..n_max.

    Returns read-only views (logn_hi, logn_lo, rsqrt_n) indexed directly
    by n; entry 0 is a placeholder.  The backing table is shared and only
    ever grows, so callers must not mutate the views.
    """
    _ensure_logn(n_max)
    return (_logn_hi[:n_max + 1], _logn_lo[:n_max + 1],
            _rsqrt_n[:n_max + 1])


def _phase_cos_sum(t: np.ndarray, t_lo: np.ndarray,
                   th: np.ndarray, tl: np.ndarray,
                   n_count: np.ndarray, n_max: int) -> np.ndarray:
    """sum_{n<=n_count[i]} n^{-1/2} * cos(theta(t_i) - t_i log n).

    The phase matrix is built in double-word arithmetic (t itself may be
    double-word), reduced mod 2pi, and only then collapsed to a native
    cosine.
    """
    _ensure_logn(n_max)
    ns = np.arange(1, n_max + 1)
    lh = _logn_hi[1:n_max + 1][None, :]
    ll = _logn_lo[1:n_max + 1][None, :]
    tcol = t[:, None]
    ph, pl = dd.v_two_prod(tcol, lh)
    pl = pl + tcol * ll + t_lo[:, None] * lh
    ph, pl = dd.v_quick_two_sum(ph, pl)
    ph, pl = dd.v_dd_sub(th[:, None], tl[:, None], ph, pl)
    rh, rl = dd.v_dd_mod_2pi(ph, pl)
    c = dd.v_cos_reduced(rh, rl)
    mask = ns[None, :] <= n_count[:, None]
    return np.sum(c * _rsqrt_n[None, 1:n_max + 1] * mask, axis=1)


# -- Euler-Maclaurin zeta ---------------------------------------------

# B_{2k} for k = 1..10, exact rationals collapsed to doubles.
_B2K = tuple(float(f) for f in (
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6),
    Fraction(-3617, 510), Fraction(43867, 798), Fraction(-174611, 330),
))


def _em_tail_coeff(sigma: float, t: float, N: int) -> complex:
    """The Euler-Maclaurin tail with the oscillatory N^{-it} factored out:
    tail = C * N^{-it} and this returns C."""
    s = complex(sigma, t)
    C = N ** (1.0 - sigma) / (s - 1.0) + 0.5 * N ** (-sigma)
    # Bernoulli corrections B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{-sigma-2k+1}
    poch = s  # rising product s(s+1)...(s+2k-2), built incrementally
    fact = 2.0
    term_pow = N ** (-sigma - 1.0)
    for k, b in enumerate(_B2K, start=1):
        if k > 1:
            poch = poch * (s + (2 * k - 3)) * (s + (2 * k - 2))
            fact *= (2 * k) * (2 * k - 1)
            term_pow /= N * N
        C += b / fact * poch * term_pow
    return C


def _zeta_em_batch(sigma: float, t: np.ndarray, N: int,
                   t_lo: np.ndarray | None = None) -> np.ndarray:
    """zeta(sigma+it) by Euler-Maclaurin, vectorised over t, shared N."""
    t = np.asarray(t, dtype=np.float64)
    if t_lo is None:
        t_lo = np.zeros_like(t)
    _ensure_logn(N)
    ns = np.arange(1, N)
    lh = _logn_hi[1:N][None, :]
    ll = _logn_lo[1:N][None, :]
    tcol = t[:, None]
    ph, pl = dd.v_two_prod(tcol, lh)
    pl = pl + tcol * ll + t_lo[:, None] * lh
    ph, pl = dd.v_quick_two_sum(ph, pl)
    rh, rl = dd.v_dd_mod_2pi(-ph, -pl)
    amp = ns.astype(np.float64) ** (-sigma)
    re = np.sum(amp[None, :] * dd.v_cos_reduced(rh, rl), axis=1)
    im = np.sum(amp[None, :] * dd.v_sin_reduced(rh, rl), axis=1)
    # tail, with its N^{-it} phase done in double-word arithmetic
    lnN_h, lnN_l = _logn_hi[N], _logn_lo[N]
    ph, pl = dd.v_two_prod(t, lnN_h)
    pl = pl + t * lnN_l + t_lo * lnN_h
    rh, rl = dd.v_dd_mod_2pi(-ph, -pl)
    rot = dd.v_cos_reduced(rh, rl) + 1j * dd.v_sin_reduced(rh, rl)
    tail = np.array([_em_tail_coeff(sigma, tv, N) for tv in t]) * rot
    return (re + 1j * im) + tail


def _hardy_z_em_batch(t: np.ndarray, t_lo: np.ndarray | None = None
                      ) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t_lo is None:
        t_lo = np.zeros_like(t)
    N = max(50, int(2.0 * float(np.max(t))) + 1)
    z = _zeta_em_batch(0.5, t, N, t_lo=t_lo)
    th, tl = rs_theta_batch(t, t_lo)
    rh, rl = dd.v_dd_mod_2pi(th, tl)
    rot = dd.v_cos_reduced(rh, rl) + 1j * dd.v_sin_reduced(rh, rl)
    return (rot * z).real


def _hardy_z_rs_batch(t: np.ndarray, t_lo: np.ndarray | None = None
                      ) -> np.ndarray:
    t = np.asarray(t, dtype=np.float64)
    if t_lo is None:
        t_lo = np.zeros_like(t)
    # a = sqrt(t/2pi) with one double-word Newton polish: p = a - N must
    # be smooth in t to ~1e-16 or the remainder's jitter caps refinement
    # at close zero pairs.
    xh, xl = dd.v_dd_mul_d(t, t_lo, 1.0 / (2.0 * math.pi))
    a = np.sqrt(xh)
    sq_h, sq_l = dd.v_two_prod(a, a)
    rh, rl = dd.v_dd_sub(xh, xl, sq_h, sq_l)
    a_lo = (rh + rl) / (2.0 * a)
    N = np.floor(a)
    p = (a - N) + a_lo
    n_max = int(np.max(N))
    th, tl = rs_theta_batch(t, t_lo)
    main = _phase_cos_sum(t, t_lo, th, tl, N, n_max)
    return 2.0 * main + _rs_remainder(a, N, p)


# Evaluation matrices are chunked so rows * columns stays near this;
# keeps peak temporary memory around 100 MB.
_BATCH_CELLS = 1 << 20


def _chunked(fn, t: np.ndarray, n_cols: int,
             t_lo: np.ndarray | None = None) -> np.ndarray:
    rows = max(1, _BATCH_CELLS // max(1, n_cols))
    if t_lo is None:
        t_lo = np.zeros_like(t)
    if len(t) <= rows:
        return fn(t, t_lo)
    return np.concatenate([fn(t[i:i + rows], t_lo[i:i + rows])
                           for i in range(0, len(t), rows)])


def hardy_z_batch(t: np.ndarray, t_lo: np.ndarray | None = None
                  ) -> np.ndarray:
    """Z(t) on a float64 vector; routes each point to EM or RS.

    `t_lo` supplies double-word low words of the ordinates for
    refinement below the float64 ulp.  The floor sits slightly below 10
    so difference stencils centred at t = 10 stay in range.
    """
    t = np.asarray(t, dtype=np.float64)
    if t_lo is None:
        t_lo = np.zeros_like(t)
    if t.size and float(np.min(t)) < _THETA_MIN - 0.5:
        raise ValueError("hardy_z_batch requires t >= 9.5")
    out = np.empty_like(t)
    lo = t < EM_SWITCH
    if np.any(lo):
        tlo = t[lo]
        low_words = t_lo[lo]
        out[lo] = _chunked(
            lambda tc, lc: _hardy_z_em_batch(tc, lc), tlo,
            max(50, int(2.0 * float(np.max(tlo)))), low_words)
    hi = ~lo
    if np.any(hi):
        thi = t[hi]
        n_cols = int(math.sqrt(float(np.max(thi)) / (2.0 * math.pi)))
        out[hi] = _chunked(
            lambda tc, lc: _hardy_z_rs_batch(tc, lc), thi, n_cols, t_lo[hi])
    return out


def _hardy_z_small(t: float) -> ExtReal:
    """Z below the theta series' domain: Euler-Maclaurin zeta rotated by
    the log-Gamma phase directly.  Native precision suffices there."""
    z = _zeta_em_chunked(0.5, t, max(50, int(2.0 * t) + 1))
    th = float(_loggamma(0.25 + 0.5j * t).imag) - 0.5 * t * math.log(math.pi)
    return ExtReal((cmath.exp(1j * th) * z).real)


def hardy_z(t, method: str = "auto") -> ExtReal:
    """Hardy's function Z(t) = e^{i theta(t)} zeta(1/2+it), real-valued.

    `method` picks the evaluation path: "auto" switches from
    Euler-Maclaurin to Riemann-Siegel at t = 1000; "em" and "rs" force a
    path (the forced EM path is the independent cross-check oracle for
    the RS one).  Below t = 10 the Euler-Maclaurin path is used
    unconditionally, with the phase from log-Gamma.
    """
    tf = float(as_ext(t))
    if tf < _THETA_MIN:
        if method == "rs":
            raise ValueError("Riemann-Siegel path requires t >= 10")
        return _hardy_z_small(tf)
    arr = np.array([tf])
    if method == "auto":
        return ExtReal(float(hardy_z_batch(arr)[0]))
    if method == "em":
        return ExtReal(float(_hardy_z_em_batch(arr)[0]))
    if method == "rs":
        return ExtReal(float(_hardy_z_rs_batch(arr)[0]))
    raise ValueError(f"unknown hardy_z method {method!r}")


# -- Z' by Richardson extrapolation -----------------------------------

_RICHARDSON_H = 1.0e-4


def hardy_z_prime_batch(t: np.ndarray, h: float = _RICHARDSON_H,
                        return_spread: bool = False):
    """Z'(t) from central differences at steps h, h/2, h/4 with two
    Richardson levels; `return_spread` also yields |last - previous|
    extrapolant as a convergence certificate.

    Each quotient divides by the realized point separation, not the
    nominal step: at t ~ 1e5 the rounding of t +- h perturbs the spacing
    by ~1e-11 relative, which a nominal denominator would turn into a
    ~1e-6 error on a derivative of size ~50.  The separation itself is
    exact (difference of two floats within a factor of two).
    """
    t = np.asarray(t, dtype=np.float64)
    pts = [t + h, t - h, t + h / 2, t - h / 2, t + h / 4, t - h / 4]
    evals = hardy_z_batch(np.concatenate(pts))
    m = len(t)
    d1 = (evals[0:m] - evals[m:2 * m]) / (pts[0] - pts[1])
    d2 = (evals[2 * m:3 * m] - evals[3 * m:4 * m]) / (pts[2] - pts[3])
    d4 = (evals[4 * m:5 * m] - evals[5 * m:6 * m]) / (pts[4] - pts[5])
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d4 - d2) / 3.0
    rr = (16.0 * r2 - r1) / 15.0
    if return_spread:
        return rr, np.abs(rr - r2)
    return rr


def hardy_z_prime(t, h: float = _RICHARDSON_H) -> ExtReal:
    tf = float(as_ext(t))
    if tf < _THETA_MIN:
        # same automatic fallback as hardy_z: plain Richardson on the
        # small-t path
        d = []
        for step in (h, h / 2.0, h / 4.0):
            a, b = tf + step, tf - step
            d.append((float(_hardy_z_small(a))
                      - float(_hardy_z_small(b))) / (a - b))
        r1 = (4.0 * d[1] - d[0]) / 3.0
        r2 = (4.0 * d[2] - d[1]) / 3.0
        return ExtReal((16.0 * r2 - r1) / 15.0)
    return ExtReal(float(hardy_z_prime_batch(np.array([tf]), h=h)[0]))


# -- zeta on / near the critical line ---------------------------------


def zeta_critical(s, method: str = "auto") -> ExtComplex:
    """zeta(s) for 0 < Re(s) <= 2, 0 <= Im(s) <= 1e7.

    Euler-Maclaurin with N = max(50, 2 Im s) up to Im s = 1e4.  Above
    that, points on the critical line go through the Riemann-Siegel
    machinery (zeta = Z e^{-i theta}); off the line the Euler-Maclaurin
    sum is evaluated in chunks (slow but correct, documented cost).
    """
    if isinstance(s, ExtComplex):
        sigma, t = float(s.re), float(s.im)
    else:
        sc = complex(s)
        sigma, t = sc.real, sc.imag
    if t < 0.0:
        # lower half-plane by reflection zeta(conj s) = conj zeta(s)
        v = zeta_critical(complex(sigma, -t), method=method)
        return ExtComplex(v.re, -v.im)
    if not (0.0 < sigma <= 2.0):
        raise ValueError("zeta_critical requires 0 < Re(s) <= 2")
    if not (t <= 1.0e7):
        raise ValueError("zeta_critical requires |Im(s)| <= 1e7")
    if sigma == 1.0 and t == 0.0:
        raise ValueError("zeta has a pole at s = 1")
    if method == "auto":
        method = "em" if t <= ZETA_EM_MAX else (
            "rs" if abs(sigma - 0.5) < 1e-12 else "em")
    if method == "rs":
        z = float(hardy_z(t, method="auto"))
        th = rs_theta(t)
        rot = dd.exp_i(-th)
        return ExtComplex(rot.re * z, rot.im * z)
    if method != "em":
        raise ValueError(f"unknown zeta method {method!r}")
    N = max(50, int(2.0 * t) + 1)
    val = _zeta_em_chunked(sigma, t, N)
    return ExtComplex(ExtReal(val.real), ExtReal(val.imag))


def _zeta_em_chunked(sigma: float, t: float, N: int) -> complex:
    """Scalar Euler-Maclaurin zeta; the main sum is chunked so heights
    up to 1e7 stay within memory."""
    re_acc = 0.0
    im_acc = 0.0
    # running compensation keeps the million-term sums deterministic
    re_c = 0.0
    im_c = 0.0
    chunk = 1 << 19
    for start in range(1, N, chunk):
        stop = min(N, start + chunk)
        ns = np.arange(start, stop, dtype=np.float64)
        lh, ll = _v_dd_log(ns, np.zeros_like(ns))
        ph, pl = dd.v_two_prod(np.full_like(ns, t), lh)
        pl = pl + t * ll
        ph, pl = dd.v_quick_two_sum(ph, pl)
        rh, rl = dd.v_dd_mod_2pi(-ph, -pl)
        amp = ns ** (-sigma)
        cre = float(np.sum(amp * dd.v_cos_reduced(rh, rl)))
        cim = float(np.sum(amp * dd.v_sin_reduced(rh, rl)))
        y = cre - re_c
        tt = re_acc + y
        re_c = (tt - re_acc) - y
        re_acc = tt
        y = cim - im_c
        tt = im_acc + y
        im_c = (tt - im_acc) - y
        im_acc = tt
    lnN = dd.log(ExtReal(float(N)))
    phase = dd.mul_d(lnN, -t)
    ang, _ = dd.v_dd_mod_2pi(np.array([phase.hi]), np.array([phase.lo]))
    rot = complex(math.cos(ang[0]), math.sin(ang[0]))
    return complex(re_acc, im_acc) + _em_tail_coeff(sigma, t, N) * rot


def zeta_em_batch(sigma: float, t: np.ndarray, N: int | None = None) -> np.ndarray:
    """Vectorised Euler-Maclaurin zeta(sigma+it) over an ordinate array."""
    t = np.asarray(t, dtype=np.float64)
    if N is None:
        N = max(50, int(2.0 * float(np.max(t))) + 1)
    return _chunked(lambda tc, lc: _zeta_em_batch(sigma, tc, N, lc), t, N)
