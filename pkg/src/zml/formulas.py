"""Explicit-formula checks against a certified zero cache.

Two classical identities are evaluated numerically and packaged as
reports: the weighted zero sum of ``y^rho`` with its von Mangoldt main
term, and the discrete mean value of a Dirichlet polynomial over zeros
with its counting and correlation main terms.  Error budgets use the
written bounds with implied constant 1, and every report records the
residual-to-budget ratio instead of hiding it.

All zero sums run over the critical-line ordinates in (0, T], so they
need a bottom-anchored certified cache covering T.  Phase arguments
``gamma * log y`` are formed in double-word arithmetic before range
reduction; at gamma ~ 1e4 the phase would otherwise lose the digits the
residuals are made of.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Tuple, Union

import numpy as np

from . import ddmath as dd
from .arith import ArithmeticTables
from .cache import ZeroCache
from .ddmath import ExtComplex, ExtReal
from .special import logn_table
from .stats import WindowError, count_N, sharded_total

_RESIDUAL_TOL = 1e-12
_MAX_DENOM = 1000  # rational heights y = p/q are kept small and exact
_ROW_CHUNK = 4096

Rational = Union[int, Fraction]


# -- coefficient vectors -----------------------------------------------

class DirichletCoefficients:
    """Dense coefficients a(1..x) of a polynomial sum a_n n^{-s}.

    Entry 0 is forced to zero so the array indexes directly by n, the
    same convention the sieve tables use.  The array is frozen; build a
    new instance to change coefficients.
    """

    __slots__ = ("x", "a")

    def __init__(self, x: int, a) -> None:
        x = int(x)
        if x < 1:
            raise ValueError("need length bound x >= 1")
        arr = np.array(a, dtype=np.complex128)
        if arr.shape != (x + 1,):
            raise ValueError(f"need a dense length-{x + 1} array, index = n")
        if not np.all(np.isfinite(arr)):
            raise ValueError("coefficients must be finite")
        arr[0] = 0.0
        arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "a", arr)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("DirichletCoefficients is immutable")

    def __repr__(self) -> str:
        return f"DirichletCoefficients(x={self.x})"

    @classmethod
    def unit(cls, x: int = 2) -> "DirichletCoefficients":
        """Indicator of n = 1: the constant polynomial 1."""
        a = np.zeros(x + 1, dtype=np.complex128)
        a[1] = 1.0
        return cls(x, a)

    @classmethod
    def ones(cls, x: int) -> "DirichletCoefficients":
        a = np.ones(x + 1, dtype=np.complex128)
        return cls(x, a)

    @classmethod
    def mobius(cls, x: int, tables: ArithmeticTables) -> "DirichletCoefficients":
        if x > tables.limit:
            raise ValueError("x exceeds the sieve limit")
        return cls(x, tables.mu[:x + 1].astype(np.complex128))

    def scaled(self, lam: complex) -> "DirichletCoefficients":
        return DirichletCoefficients(self.x, self.a * lam)

    def weight(self) -> float:
        """sum |a_n|^2 / n, the mean-square weight of the polynomial."""
        ns = np.arange(1, self.x + 1, dtype=np.float64)
        return math.fsum(np.abs(self.a[1:]) ** 2 / ns)


# -- reports ------------------------------------------------------------

@dataclass(frozen=True)
class FormulaReport:
    """One checked instance of an explicit formula.

    The residual is recomputed from lhs and the named main terms on
    construction, so a report can never carry a decomposition that does
    not add up.  error_terms, when present, itemise the budget.
    """

    lhs: complex
    main_terms: Tuple[Tuple[str, complex], ...]
    residual: float
    error_budget: float
    ratio: float
    error_terms: Tuple[Tuple[str, float], ...] = ()

    def __post_init__(self):
        again = abs(self.lhs - sum(v for _, v in self.main_terms))
        if abs(again - self.residual) > _RESIDUAL_TOL * max(1.0, again):
            raise ValueError("residual does not match lhs minus main terms")
        if self.error_terms:
            total = math.fsum(v for _, v in self.error_terms)
            if abs(total - self.error_budget) > _RESIDUAL_TOL * max(1.0, total):
                raise ValueError("error_terms do not add up to the budget")

    def main(self, name: str) -> complex:
        for key, value in self.main_terms:
            if key == name:
                return value
        raise KeyError(name)

    def as_dict(self) -> dict:
        def num(v):
            v = complex(v)
            return v.real if v.imag == 0.0 else [v.real, v.imag]

        out = {"lhs": num(self.lhs)}
        for key, value in self.main_terms:
            out[key] = num(value)
        out["residual"] = self.residual
        out["budget"] = self.error_budget
        out["ratio"] = self.ratio
        if self.error_terms:
            out["error_terms"] = {k: v for k, v in self.error_terms}
        return out


# -- prime powers -------------------------------------------------------

def _smallest_prime_factor(n: int) -> int:
    d = 2
    while d * d <= n:
        if n % d == 0:
            return d
        d += 1
    return n


def _is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = _smallest_prime_factor(n)
    while n % p == 0:
        n //= p
    return n == 1


def _lambda_of(y: Fraction) -> ExtReal:
    """von Mangoldt Lambda(y): log p when y = p^a, else 0 (non-integers
    included)."""
    if y.denominator != 1 or not _is_prime_power(y.numerator):
        return ExtReal(0.0)
    return dd.log(dd.as_ext(float(_smallest_prime_factor(y.numerator))))


def _ext_of_fraction(fr: Fraction) -> ExtReal:
    # both words exact for the small rationals admitted here
    return dd.as_ext(float(fr.numerator)) / float(fr.denominator)


def prime_power_distance(y: Rational) -> ExtReal:
    """Distance from y > 1 to the nearest prime power other than y.

    Exact over rationals.  The scan window [y/2, 2y] always contains a
    prime different from y (Bertrand), and any prime power outside the
    window is farther away than that one, so the window suffices.
    """
    y = Fraction(y)
    if y <= 1:
        raise ValueError("need y > 1")
    lo = -((-y.numerator) // (2 * y.denominator))  # ceil(y/2)
    hi = (2 * y.numerator) // y.denominator        # floor(2y)
    best = None
    for q in range(max(2, lo), hi + 1):
        if y == q or not _is_prime_power(q):
            continue
        d = abs(y - q)
        if best is None or d < best:
            best = d
    assert best is not None
    return _ext_of_fraction(best)


# -- zero-cache plumbing -----------------------------------------------

def _zero_slice(cache: ZeroCache, T) -> Tuple[np.ndarray, np.ndarray, int]:
    """Ordinates in (0, T] from a bottom-anchored certified cache."""
    t = dd.as_ext(T)
    if float(t) <= 1.0:
        raise ValueError("need T > 1")
    if not cache.certified:
        raise WindowError("cache is not certified; certify before summing")
    if float(cache.height_lo) > 0.0:
        raise WindowError("explicit-formula sums need a bottom-anchored cache")
    n = count_N(t, cache)
    return cache.gamma_hi[:n], cache.gamma_lo[:n], n


def _phase_pairs(g_h, g_l, w_h, w_l) -> Tuple[np.ndarray, np.ndarray]:
    """gamma * w as a double-word pair; broadcasting matches g against w."""
    ph, pl = dd.v_two_prod(g_h, w_h)
    pl = pl + g_h * w_l + g_l * w_h
    return dd.v_quick_two_sum(ph, pl)


def _phase_trig_rows(g_h, g_l, w_h, w_l) -> Tuple[np.ndarray, np.ndarray]:
    """cos and sin of gamma * w, phases carried in double-word form."""
    ph, pl = _phase_pairs(g_h, g_l, w_h, w_l)
    rh, rl = dd.v_dd_mod_2pi(ph, pl)
    return dd.v_cos_reduced(rh, rl), dd.v_sin_reduced(rh, rl)


# -- Landau-Gonek -------------------------------------------------------

def landau_gonek_check(y: Rational, T, cache: ZeroCache) -> FormulaReport:
    """Compare sum_{0<gamma<=T} y^(1/2+i*gamma) with -(T/2pi) Lambda(y).

    y must be a rational > 1 with denominator at most 1000, kept exact
    so the prime-power distance in the budget is exact too.  The three
    written error terms are itemised in the report.
    """
    y = Fraction(y)
    if y <= 1:
        raise ValueError("need y > 1")
    if y.denominator > _MAX_DENOM:
        raise ValueError(f"denominator of y capped at {_MAX_DENOM}")
    g_h, g_l, _ = _zero_slice(cache, T)
    t = dd.as_ext(T)

    w = dd.log(_ext_of_fraction(y))
    c, s = _phase_trig_rows(g_h, g_l, w.hi, w.lo)
    ry = dd.sqrt(_ext_of_fraction(y))
    lhs = complex(float(ry * sharded_total(c)), float(ry * sharded_total(s)))

    main = complex(-float(t * _lambda_of(y) / dd.TWO_PI))
    residual = abs(lhs - main)

    yf = float(y)
    tf = float(t)
    spacing = float(prime_power_distance(y))
    bulk = yf * math.log(2.0 * yf * tf) * math.log(math.log(3.0 * yf))
    near_pp = math.log(yf) * min(tf, yf / spacing)
    near_one = math.log(2.0 * tf) * min(tf, 1.0 / math.log(yf))
    budget = bulk + near_pp + near_one

    return FormulaReport(
        lhs=lhs,
        main_terms=(("main_Lambda_term", main),),
        residual=residual,
        error_budget=budget,
        ratio=residual / budget,
        error_terms=(("bulk_term", bulk),
                     ("spacing_term", near_pp),
                     ("near_one_term", near_one)))


# -- Dirichlet polynomials at zeros -------------------------------------

def dirichlet_poly_at_zero(coeffs: DirichletCoefficients,
                           gamma) -> ExtComplex:
    """Evaluate sum_{n<=x} a_n n^(-1/2) e^(-i*gamma*log n) at one ordinate."""
    g = dd.as_ext(gamma)
    lh, ll, rs = logn_table(coeffs.x)
    c, s = _phase_trig_rows(np.array([[g.hi]]), np.array([[g.lo]]),
                            lh[1:], ll[1:])
    ar = coeffs.a.real[1:] * rs[1:]
    ai = coeffs.a.imag[1:] * rs[1:]
    # e^{-i phi} = cos phi - i sin phi
    re = math.fsum(ar * c[0] + ai * s[0])
    im = math.fsum(ai * c[0] - ar * s[0])
    return ExtComplex(re, im)


def _abs_poly_sq(coeffs: DirichletCoefficients, g_h: np.ndarray,
                 g_l: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """|D(1/2 + i*gamma)|^2 per ordinate, as D times a separately
    evaluated conjugate factor.

    Returns (real part, imaginary dust).  The conjugate factor reduces
    the negated phase on its own, so its cosines and sines round
    independently of D's; the imaginary part of the product is then a
    genuine tripwire for the phase pipeline, not an algebraic zero.
    """
    lh, ll, rs = logn_table(coeffs.x)
    lh = lh[1:][None, :]
    ll = ll[1:][None, :]
    ar = coeffs.a.real[1:] * rs[1:]
    ai = coeffs.a.imag[1:] * rs[1:]
    val = np.empty(len(g_h))
    dust = np.empty(len(g_h))
    for i in range(0, len(g_h), _ROW_CHUNK):
        gh = g_h[i:i + _ROW_CHUNK][:, None]
        gl = g_l[i:i + _ROW_CHUNK][:, None]
        ph, pl = _phase_pairs(gh, gl, lh, ll)
        rh, rl = dd.v_dd_mod_2pi(ph, pl)
        c = dd.v_cos_reduced(rh, rl)
        s = dd.v_sin_reduced(rh, rl)
        rh, rl = dd.v_dd_mod_2pi(-ph, -pl)
        cc = dd.v_cos_reduced(rh, rl)   # cos(+phi), rounded independently
        sc = dd.v_sin_reduced(rh, rl)   # sin(-phi) = -sin(+phi)
        # D = sum a_n w_n e^{-i phi_n}, conj(D) via the negated reduction
        re = np.sum(c * ar + s * ai, axis=1)
        im = np.sum(c * ai - s * ar, axis=1)
        re_c = np.sum(cc * ar - sc * ai, axis=1)
        im_c = -np.sum(cc * ai + sc * ar, axis=1)
        val[i:i + _ROW_CHUNK] = re * re_c - im * im_c
        dust[i:i + _ROW_CHUNK] = re * im_c + im * re_c
    return val, dust


def _lambda_cross_sum(coeffs: DirichletCoefficients,
                      tables: ArithmeticTables) -> float:
    """Re sum_{k*n <= x} conj(a_{kn}) a_n Lambda(k) / (k n)."""
    x = coeffs.x
    a = coeffs.a
    parts = []
    for k in range(2, x + 1):
        p = int(tables.lam_p[k])
        if p == 0:
            continue
        m = x // k
        ns = np.arange(1, m + 1)
        inner = (np.conj(a[k * ns]) * a[1:m + 1]).real / (k * ns)
        parts.append(math.log(p) * math.fsum(inner))
    return math.fsum(parts) if parts else 0.0


def mvt_check(coeffs: DirichletCoefficients, T, cache: ZeroCache,
              tables: ArithmeticTables) -> FormulaReport:
    """Discrete mean value sum_{0<gamma<=T} |D(rho)|^2 against its main
    terms N(T) sum |a_n|^2/n and -(T/pi) Re sum conj(a_{kn}) a_n
    Lambda(k)/(kn), with budget x (log xT)^2 sum |a_n|^2/n.
    """
    if coeffs.x < 2:
        raise ValueError("mean-value check needs x >= 2")
    if coeffs.x > tables.limit:
        raise ValueError("x exceeds the sieve limit")
    g_h, g_l, n_T = _zero_slice(cache, T)
    t = dd.as_ext(T)

    vals, dust = _abs_poly_sq(coeffs, g_h, g_l)
    lhs = float(sharded_total(vals))
    imag_residue = abs(float(sharded_total(dust)))
    assert lhs >= 0.0
    assert imag_residue <= 1e-10 * max(lhs, 1.0)

    w = coeffs.weight()
    main_N = float(n_T) * w
    main_La = -float(t / dd.PI) * _lambda_cross_sum(coeffs, tables)
    residual = abs(lhs - (main_N + main_La))
    budget = float(coeffs.x) * math.log(float(coeffs.x) * float(t)) ** 2 * w

    return FormulaReport(
        lhs=complex(lhs),
        main_terms=(("main_N_term", complex(main_N)),
                    ("main_Lambda_term", complex(main_La))),
        residual=residual,
        error_budget=budget,
        ratio=residual / budget)
