"""Double-word floating point arithmetic.

An extended real is an unevaluated sum ``hi + lo`` of two native doubles
normalised so that ``|lo| <= 0.5 * ulp(hi)``.  This doubles the working
precision to about 31-32 significant digits while staying in hardware
floats, which is enough to keep phases like ``t*log(n)`` at heights up to
1e7 accurate to well below 1e-20 absolute.

The building blocks are the classical error-free transformations:

* ``_two_sum``     Knuth's branch-free TwoSum: ``a + b = s + err`` exactly.
* ``_quick_two_sum``  Dekker's FastTwoSum, valid when ``|a| >= |b|``.
* ``_two_prod``    Dekker's product with the 2**27 + 1 splitter, so that
                   ``a * b = p + err`` exactly (no fma on this platform).

Addition uses the accurate double-word sum (two TwoSums plus a
renormalisation) whose relative error is bounded by ``3u^2`` with
``u = 2**-53``; multiplication and division stay below ``10u^2``.  The
transcendental functions reduce their argument, run a short Taylor
series in double-word arithmetic and undo the reduction, giving relative
errors around 1e-30, comfortably inside the 1e-28 budget the rest of the
package assumes on ``|x| <= 1e10``.

Trigonometric argument reduction uses a three-double image of pi/2
(about 159 bits), so even at ``x ~ 1e10`` the reduced argument keeps
roughly 25 digits past the double-word level.

A light vector mirror of the same transformations (prefix ``v_``)
operates on numpy arrays of ``hi``/``lo`` pairs; the zero engine leans on
it to evaluate Hardy's function at thousands of points per call.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Iterable, Tuple, Union

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1, Dekker/Veltkamp splitting constant


def _two_sum(a: float, b: float) -> Tuple[float, float]:
    """Error-free sum: returns (s, err) with a + b = s + err exactly."""
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a: float, b: float) -> Tuple[float, float]:
    """Error-free sum assuming |a| >= |b|."""
    s = a + b
    return s, b - (s - a)


def _split(a: float) -> Tuple[float, float]:
    """Veltkamp split of a double into 26 + 27 bit halves."""
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> Tuple[float, float]:
    """Error-free product: returns (p, err) with a * b = p + err exactly."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


Scalar = Union[int, float, "ExtReal"]


class ExtReal:
    """A real number held as a normalised double-word pair.

    Instances are immutable.  Arithmetic with plain ints/floats promotes
    the native operand exactly (every double is exactly representable).
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi: float = 0.0, lo: float = 0.0):
        s, e = _two_sum(float(hi), float(lo))
        object.__setattr__(self, "hi", s)
        object.__setattr__(self, "lo", e)

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("ExtReal is immutable")

    # -- constructors -------------------------------------------------

    @classmethod
    def from_int(cls, n: int) -> "ExtReal":
        hi = float(n)
        lo = float(n - int(hi))
        return cls(hi, lo)

    @classmethod
    def from_str(cls, s: str) -> "ExtReal":
        with localcontext() as ctx:
            ctx.prec = 60
            d = Decimal(s)
            hi = float(d)
            lo = float(d - Decimal(hi))
        return cls(hi, lo)

    # -- conversions --------------------------------------------------

    def __float__(self) -> float:
        return self.hi + self.lo

    def to_decimal(self, sig_digits: int = 25) -> Decimal:
        """Exact value of hi + lo, rounded to `sig_digits` significant digits."""
        with localcontext() as ctx:
            ctx.prec = 60
            exact = Decimal(self.hi) + Decimal(self.lo)
            if exact == 0:
                return Decimal(0)
            ctx.prec = sig_digits
            return +exact

    def __repr__(self) -> str:
        return f"ExtReal({self.hi!r}, {self.lo!r})"

    def __str__(self) -> str:
        return str(self.to_decimal())

    # -- ordering -----------------------------------------------------

    def _cmp(self, other: Scalar) -> int:
        o = as_ext(other)
        d = sub(self, o)
        if d.hi > 0.0 or (d.hi == 0.0 and d.lo > 0.0):
            return 1
        if d.hi < 0.0 or (d.hi == 0.0 and d.lo < 0.0):
            return -1
        return 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (int, float, ExtReal)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other) -> bool:
        return self._cmp(other) < 0

    def __le__(self, other) -> bool:
        return self._cmp(other) <= 0

    def __gt__(self, other) -> bool:
        return self._cmp(other) > 0

    def __ge__(self, other) -> bool:
        return self._cmp(other) >= 0

    def __hash__(self):
        return hash((self.hi, self.lo))

    # -- arithmetic ---------------------------------------------------

    def __neg__(self) -> "ExtReal":
        return _mk(-self.hi, -self.lo)

    def __abs__(self) -> "ExtReal":
        return -self if self.hi < 0.0 or (self.hi == 0.0 and self.lo < 0.0) else self

    def __add__(self, other: Scalar) -> "ExtReal":
        return add(self, as_ext(other))

    __radd__ = __add__

    def __sub__(self, other: Scalar) -> "ExtReal":
        return sub(self, as_ext(other))

    def __rsub__(self, other: Scalar) -> "ExtReal":
        return sub(as_ext(other), self)

    def __mul__(self, other: Scalar) -> "ExtReal":
        return mul(self, as_ext(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "ExtReal":
        return div(self, as_ext(other))

    def __rtruediv__(self, other: Scalar) -> "ExtReal":
        return div(as_ext(other), self)


def _mk(hi: float, lo: float) -> ExtReal:
    """Build an ExtReal from an already-normalised pair, skipping __init__'s renorm."""
    obj = ExtReal.__new__(ExtReal)
    object.__setattr__(obj, "hi", hi)
    object.__setattr__(obj, "lo", lo)
    return obj


def as_ext(x: Scalar) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, int) and abs(x) > 2**53:
        return ExtReal.from_int(x)
    return _mk(float(x), 0.0)


def add(x: ExtReal, y: ExtReal) -> ExtReal:
    # Accurate double-word sum (Joldes-Muller-Popescu AccurateDWPlusDW).
    s1, s2 = _two_sum(x.hi, y.hi)
    t1, t2 = _two_sum(x.lo, y.lo)
    s2 += t1
    s1, s2 = _quick_two_sum(s1, s2)
    s2 += t2
    s1, s2 = _quick_two_sum(s1, s2)
    return _mk(s1, s2)


def sub(x: ExtReal, y: ExtReal) -> ExtReal:
    return add(x, _mk(-y.hi, -y.lo))


def mul(x: ExtReal, y: ExtReal) -> ExtReal:
    p, e = _two_prod(x.hi, y.hi)
    e += x.hi * y.lo + x.lo * y.hi
    p, e = _quick_two_sum(p, e)
    return _mk(p, e)


def div(x: ExtReal, y: ExtReal) -> ExtReal:
    if y.hi == 0.0:
        raise ZeroDivisionError("ExtReal division by zero")
    q1 = x.hi / y.hi
    r = sub(x, mul_d(y, q1))
    q2 = r.hi / y.hi
    r = sub(r, mul_d(y, q2))
    q3 = r.hi / y.hi
    s, e = _quick_two_sum(q1, q2)
    return add(_mk(s, e), _mk(q3, 0.0))


def mul_d(x: ExtReal, c: float) -> ExtReal:
    """ExtReal times a native double."""
    p, e = _two_prod(x.hi, c)
    e += x.lo * c
    p, e = _quick_two_sum(p, e)
    return _mk(p, e)


def ldexp(x: ExtReal, k: int) -> ExtReal:
    """Exact scaling by 2**k."""
    return _mk(math.ldexp(x.hi, k), math.ldexp(x.lo, k))


def sqrt(x: ExtReal) -> ExtReal:
    """Square root by one Karp-Markstein correction of the native root."""
    if x.hi < 0.0:
        raise ValueError("sqrt of negative ExtReal")
    if x.hi == 0.0:
        return _mk(0.0, 0.0)
    y = 1.0 / math.sqrt(x.hi)
    t = x.hi * y
    # sqrt(x) ~ t + (x - t^2) * y / 2; the residual is computed exactly.
    t2, t2e = _two_prod(t, t)
    resid = add(sub(x, _mk(t2, t2e)), _mk(0.0, 0.0))
    corr = (resid.hi + resid.lo) * (y * 0.5)
    s, e = _quick_two_sum(t, corr)
    return _mk(s, e)


# -- frozen constants (hi/lo split of 60-digit values) -----------------

PI = _mk(3.141592653589793, 1.2246467991473532e-16)
TWO_PI = _mk(6.283185307179586, 2.4492935982947064e-16)
PI_OVER_2 = _mk(1.5707963267948966, 6.123233995736766e-17)
PI_OVER_8 = _mk(0.39269908169872414, 1.5308084989341915e-17)
LOG_2 = _mk(0.6931471805599453, 2.3190468138462996e-17)
LOG_PI = _mk(1.1447298858494002, 1.0265951162707826e-17)
LOG_2PI = _mk(1.8378770664093456, -7.756588316134483e-17)
E = _mk(2.718281828459045, 1.4456468917292502e-16)

# Three-double images used for trig argument reduction (about 159 bits).
_PIO2_3 = (1.5707963267948966, 6.123233995736766e-17, -1.4973849048591698e-33)
_TWOPI_3 = (6.283185307179586, 2.4492935982947064e-16, -5.989539619436679e-33)


def exp(x: ExtReal) -> ExtReal:
    """exp by range reduction x = k*log2 + r, |r| <= log2/2, then a scaled
    Taylor series exp(r/32)**32."""
    xf = float(x)
    if xf > 709.0:
        raise OverflowError("exp overflow in ExtReal")
    if xf < -745.0:
        return _mk(0.0, 0.0)
    k = int(round(xf / 0.6931471805599453))
    r = sub(x, mul_d(LOG_2, float(k)))
    r = ldexp(r, -5)  # |r| <= log2/64 ~ 0.0109
    # 14 Taylor terms leave a remainder below 1e-35.
    acc = _mk(1.0, 0.0)
    for n in range(14, 0, -1):
        acc = add(mul(acc, div(r, _mk(float(n), 0.0))), _mk(1.0, 0.0))
    for _ in range(5):
        acc = mul(acc, acc)
    return ldexp(acc, k)


def log(x: ExtReal) -> ExtReal:
    """log by one Newton correction of the native logarithm.

    Near 1 the Newton step's absolute error floor (~1e-32) would swamp a
    tiny logarithm, so there the atanh series in w/(2+w) is used instead,
    which is accurate relative to log(x) itself.
    """
    if x.hi <= 0.0:
        raise ValueError("log of non-positive ExtReal")
    if 0.75 < x.hi < 1.5:
        w = sub(x, _mk(1.0, 0.0))
        u = div(w, add(w, _mk(2.0, 0.0)))
        u2 = mul(u, u)
        acc = _mk(0.0, 0.0)
        for m in range(41, 0, -2):
            acc = mul(acc, u2)
            acc = add(acc, div(_mk(2.0, 0.0), _mk(float(m), 0.0)))
        return mul(acc, u)
    y0 = math.log(x.hi)
    # y1 = y0 + x*exp(-y0) - 1 doubles the correct digits of y0.
    e = exp(_mk(-y0, 0.0))
    return add(_mk(y0, 0.0), sub(mul(x, e), _mk(1.0, 0.0)))


def _sin_cos_kernel(r: ExtReal) -> Tuple[ExtReal, ExtReal]:
    """Taylor sin and cos on |r| <= pi/4."""
    r2 = mul(r, r)
    s = _mk(0.0, 0.0)
    c = _mk(0.0, 0.0)
    # sin: sum_{m odd} (-1)^((m-1)/2) r^m / m!, through m = 29.
    for m in range(29, 0, -2):
        s = mul(s, r2)
        term = _INV_FACT[m] if (m - 1) // 2 % 2 == 0 else -_INV_FACT[m]
        s = add(s, term)
    s = mul(s, r)
    for m in range(28, -1, -2):
        c = mul(c, r2)
        term = _INV_FACT[m] if m // 2 % 2 == 0 else -_INV_FACT[m]
        c = add(c, term)
    return s, c


# 1/m! as ExtReal, m = 0..30, derived from exact integers.
def _build_inv_fact(n: int = 30):
    out = []
    f = 1
    for m in range(n + 1):
        if m:
            f *= m
        hi = 1.0 / f
        resid = Fraction(1, f) - Fraction(hi)
        out.append(_mk(hi, float(resid)))
    return out


_INV_FACT = _build_inv_fact()


def _trig_reduce(x: ExtReal) -> Tuple[ExtReal, int]:
    """Write x = k*(pi/2) + r with |r| <= pi/4 + eps; returns (r, k mod 4).

    Valid for |x| <= ~1e15; the three-double pi/2 keeps the reduced
    argument accurate to ~1e-33 even when k ~ 6e9.
    """
    xf = float(x)
    k = round(xf / 1.5707963267948966)
    if k == 0:
        return x, 0
    kf = float(k)
    r = x
    for p in _PIO2_3[:2]:
        ph, pl = _two_prod(kf, p)
        r = sub(r, _mk(ph, pl))
    r = sub(r, _mk(kf * _PIO2_3[2], 0.0))
    return r, k % 4


def sin_cos(x: ExtReal) -> Tuple[ExtReal, ExtReal]:
    r, q = _trig_reduce(x)
    s, c = _sin_cos_kernel(r)
    if q == 0:
        return s, c
    if q == 1:
        return c, -s
    if q == 2:
        return -s, -c
    return -c, s


def sin(x: ExtReal) -> ExtReal:
    return sin_cos(x)[0]


def cos(x: ExtReal) -> ExtReal:
    return sin_cos(x)[1]


def _atan_kernel(x: ExtReal) -> ExtReal:
    # One Newton step on tan(y) = x; fine for |x| <= 1 where the error
    # amplification factor tan(y) stays bounded.
    y0 = math.atan(float(x))
    s, c = sin_cos(_mk(y0, 0.0))
    # y1 = y0 + (x*cos(y0) - sin(y0)) * cos(y0)
    return add(_mk(y0, 0.0), mul(sub(mul(x, c), s), c))


def atan(x: ExtReal) -> ExtReal:
    """arctan; large arguments go through atan(x) = +-pi/2 - atan(1/x)."""
    if abs(x.hi) <= 1.0:
        return _atan_kernel(x)
    r = _atan_kernel(div(_mk(1.0, 0.0), x))
    half_pi = PI_OVER_2 if x.hi > 0 else -PI_OVER_2
    return sub(half_pi, r)


class ExtComplex:
    """Complex number with double-word real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: Scalar = 0.0, im: Scalar = 0.0):
        object.__setattr__(self, "re", as_ext(re))
        object.__setattr__(self, "im", as_ext(im))

    def __setattr__(self, name, value):  # pragma: no cover - guard only
        raise AttributeError("ExtComplex is immutable")

    def __repr__(self) -> str:
        return f"ExtComplex({self.re!r}, {self.im!r})"

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExtComplex):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def conjugate(self) -> "ExtComplex":
        return ExtComplex(self.re, -self.im)

    def __neg__(self) -> "ExtComplex":
        return ExtComplex(-self.re, -self.im)

    def __add__(self, other) -> "ExtComplex":
        o = _as_ext_complex(other)
        return ExtComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> "ExtComplex":
        o = _as_ext_complex(other)
        return ExtComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> "ExtComplex":
        return _as_ext_complex(other) - self

    def __mul__(self, other) -> "ExtComplex":
        o = _as_ext_complex(other)
        return ExtComplex(self.re * o.re - self.im * o.im,
                          self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ExtComplex":
        o = _as_ext_complex(other)
        den = o.re * o.re + o.im * o.im
        return ExtComplex((self.re * o.re + self.im * o.im) / den,
                          (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other) -> "ExtComplex":
        return _as_ext_complex(other) / self

    def abs2(self) -> ExtReal:
        return self.re * self.re + self.im * self.im

    def __abs__(self) -> ExtReal:
        return sqrt(self.abs2())


def _as_ext_complex(x) -> ExtComplex:
    if isinstance(x, ExtComplex):
        return x
    if isinstance(x, complex):
        return ExtComplex(x.real, x.imag)
    return ExtComplex(as_ext(x), 0.0)


def exp_i(phase: ExtReal) -> ExtComplex:
    """e**(i*phase)."""
    s, c = sin_cos(phase)
    return ExtComplex(c, s)


# ---------------------------------------------------------------------
# Vectorised double-word helpers on numpy arrays.
#
# Each double-word vector is a pair of float64 arrays (hi, lo).  Only the
# operations the evaluation hot loops need are provided; everything else
# goes through the scalar class.
# ---------------------------------------------------------------------


def v_two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def v_quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def v_two_prod(a, b):
    p = a * b
    t = _SPLITTER * a
    ah = t - (t - a)
    al = a - ah
    t = _SPLITTER * b
    bh = t - (t - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def v_dd_add(ah, al, bh, bl):
    s1, s2 = v_two_sum(ah, bh)
    t1, t2 = v_two_sum(al, bl)
    s2 = s2 + t1
    s1, s2 = v_quick_two_sum(s1, s2)
    s2 = s2 + t2
    return v_quick_two_sum(s1, s2)


def v_dd_sub(ah, al, bh, bl):
    return v_dd_add(ah, al, -bh, -bl)


def v_dd_mul(ah, al, bh, bl):
    p, e = v_two_prod(ah, bh)
    e = e + (ah * bl + al * bh)
    return v_quick_two_sum(p, e)


def v_dd_mul_d(ah, al, c):
    p, e = v_two_prod(ah, c)
    e = e + al * c
    return v_quick_two_sum(p, e)


def v_dd_mod_2pi(ah, al):
    """Reduce a double-word vector modulo 2*pi into [-pi, pi]."""
    k = np.round(ah * (1.0 / 6.283185307179586))
    rh, rl = ah, al
    for p in _TWOPI_3[:2]:
        ph, pl = v_two_prod(k, p)
        rh, rl = v_dd_sub(rh, rl, ph, pl)
    rh, rl = v_dd_sub(rh, rl, k * _TWOPI_3[2], np.zeros_like(rh))
    # a second pass mops up the cases that round to the wrong multiple
    adjust = np.where(rh > 3.141592653589793, -1.0, np.where(rh < -3.141592653589793, 1.0, 0.0))
    if np.any(adjust):
        for p in _TWOPI_3[:2]:
            ph, pl = v_two_prod(-adjust, p)
            rh, rl = v_dd_sub(rh, rl, ph, pl)
    return rh, rl


def v_cos_reduced(rh, rl):
    """cos of a double-word phase already reduced into [-pi, pi].

    Native cos plus a first-order correction for the low word; absolute
    error ~2e-16, which is all the downstream sums need once the phase
    itself is trustworthy.
    """
    return np.cos(rh) - rl * np.sin(rh)


def v_sin_reduced(rh, rl):
    return np.sin(rh) + rl * np.cos(rh)


def ulp_ok(x: ExtReal) -> bool:
    """Representation invariant: |lo| <= 0.5 ulp(hi)."""
    if x.hi == 0.0:
        return x.lo == 0.0
    return abs(x.lo) <= 0.5 * math.ulp(x.hi) + 1e-300


def compensated_sum(values: Iterable[float]) -> ExtReal:
    """Neumaier-style compensated sum of native doubles, returned as ExtReal."""
    s = 0.0
    c = 0.0
    for v in values:
        t = s + v
        if abs(s) >= abs(v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
    return ExtReal(s, c)


class SaturationError(ArithmeticError):
    """A double-word operation left the representable range (overflow, or
    underflow of a nonzero exact result).  Raised instead of clamping."""


_EXT_UNARY = frozenset({"sqrt", "log", "exp", "sin", "cos", "atan"})
_MIN_NORMAL = 2.2250738585072014e-308


def ext_arith(op: str, x: ExtReal, y: ExtReal | None = None) -> ExtReal:
    """Uniform dispatcher over the double-word operations.

    Op-codes: add, sub, mul, div (binary); sqrt, log, exp, sin, cos,
    atan (unary).  Range violations surface as SaturationError; results
    are never silently clamped to 0 or inf.
    """
    if not math.isfinite(x.hi) or (y is not None and not math.isfinite(y.hi)):
        raise ValueError("ext_arith requires finite inputs")
    binary = {"add": add, "sub": sub, "mul": mul, "div": div}
    if op in binary:
        if y is None:
            raise TypeError(f"{op} needs two operands")
        r = binary[op](x, y)
        if not math.isfinite(r.hi):
            raise SaturationError(f"{op} overflowed the double-word range")
        if op in ("mul", "div"):
            if 0.0 < abs(r.hi) < _MIN_NORMAL:
                raise SaturationError(f"{op} underflowed the double-word range")
            if r.hi == 0.0 and x.hi != 0.0 and y.hi != 0.0:
                raise SaturationError(f"{op} underflowed the double-word range")
        return r
    if op in _EXT_UNARY:
        if y is not None:
            raise TypeError(f"{op} takes one operand")
        fn = {"sqrt": sqrt, "log": log, "exp": exp, "sin": sin, "cos": cos,
              "atan": atan}[op]
        try:
            r = fn(x)
        except OverflowError as e:
            raise SaturationError(str(e)) from e
        if not math.isfinite(r.hi):
            raise SaturationError(f"{op} overflowed the double-word range")
        if op == "exp" and r.hi == 0.0:
            raise SaturationError("exp underflowed the double-word range")
        return r
    raise ValueError(f"unknown op-code {op!r}")
