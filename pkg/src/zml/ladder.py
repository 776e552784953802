"""Parameter ladders, truncated exponentials, and prime polynomials.

The ladder (beta_j, s_j, ell_j) splits the primes below a power of T
into geometric blocks; truncated exponentials of the block polynomials
P_{u,v} then majorise negative powers of zeta slightly off the critical
line.  Everything here is a pure function of immutable parameters, a
coefficient model, and the sieve tables.

Two things are deliberately surfaced rather than hidden.  The closed
smallness condition on the cap c involves (r^(1-d) - 1)^-1, which blows
up for desk-sized T; when no grid value satisfies it, the cap falls
back to the largest grid value for which the prime-budget constraints
still hold, and the strict condition is reported as an advisory check.
Second, the coefficients b(p; Delta) are only known here through their
cap, so the default model is that cap itself; bounds that depend only
on the cap stay faithful, and anything needing the true coefficients
is recorded, not asserted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import ddmath as dd
from .arith import ArithmeticTables, ResourceLimitError
from .cache import ZeroCache
from .ddmath import ExtReal
from .special import logn_table, zeta_em_batch
from .stats import WindowError

_C_GRID = tuple(round(0.5 - 0.05 * i, 2) for i in range(10))  # 0.5 .. 0.05
_IDENTITY_TOL = 1e-12
_MAX_LEVELS = 64
_LOGN_BUDGET = 4_000_000  # dense log-table cap for prime intervals
_B_EPS = 0.01  # epsilon in the 1/2 + epsilon coefficient-cap branch


class InfeasibleLadderError(ValueError):
    """No ladder fits: the message names the violated inequality."""


class PropertyViolationError(AssertionError):
    """A scanned inequality failed; the message carries the witness."""


# -- ladder parameters --------------------------------------------------

@dataclass(frozen=True)
class LadderParams:
    """Block decomposition parameters for one (k, epsilon, delta, T).

    beta[j+1] = r * beta[j] bitwise (built by iterated multiplication),
    ell[j] = 2*ceil(s[j]^d / 2) is even, and T^beta[j] = e^(2 pi
    Delta[j]).  c is the recorded cap with beta[K] <= c.
    """

    regime: str                  # "small_k" or "large_k"
    k: float
    eps: float
    delta_margin: float          # the (1+delta) margin of the large_k base
    a: float
    r: float
    d: float
    c: float
    c_strict: bool               # True when c satisfied the closed condition
    K: int
    beta: Tuple[float, ...]
    s: Tuple[int, ...]
    ell: Tuple[int, ...]
    Delta: Tuple[float, ...]
    T: ExtReal

    @property
    def log_t(self) -> float:
        return math.log(float(self.T))

    def threshold(self, u: int) -> float:
        """Membership threshold ell_u / (k e^2) for the u-th block set."""
        return self.ell[u] / (self.k * math.exp(2.0))

    def interval(self, u: int) -> Tuple[float, float]:
        """(lo, hi] endpoints of the u-th prime block; block 0 starts at 1."""
        lo = 1.0 if u == 0 else math.exp(self.beta[u - 1] * self.log_t)
        return lo, math.exp(self.beta[u] * self.log_t)

    def as_dict(self) -> dict:
        return {
            "regime": self.regime, "k": self.k, "eps": self.eps,
            "delta": self.delta_margin, "a": self.a, "r": self.r,
            "d": self.d, "c": self.c, "c_strict": self.c_strict,
            "K": self.K, "beta": list(self.beta), "s": list(self.s),
            "ell": list(self.ell), "Delta": list(self.Delta),
            "T": float(self.T),
        }


def _ell_of(s: int, d: float) -> int:
    return 2 * math.ceil(s ** d / 2.0)


def _condition_c_sides(c: float, a: float, r: float, d: float,
                       log_t: float) -> Tuple[float, float]:
    lhs = c ** (1.0 - d) * (a ** d * r ** (1.0 - d) / (r ** (1.0 - d) - 1.0)
                            + 2.0 * r / (r - 1.0))
    rhs = 1.0 - a - math.log(log_t) / log_t
    return lhs, rhs


def _prefix_ok(beta: Sequence[float], ell: Sequence[int],
               s: Sequence[int], j: int, bound: float) -> bool:
    """Both prime-budget constraints for the ladder truncated at level j."""
    total = math.fsum(ell[h] * beta[h] for h in range(j + 1))
    if total > bound:
        return False
    for i in range(j):
        head = math.fsum(ell[h] * beta[h] for h in range(i + 1))
        if head + s[i + 1] * beta[i + 1] > bound:
            return False
    return True


def make_ladder(k: float, eps: float, delta: float, T) -> LadderParams:
    """Build the ladder for one parameter point.

    The regime splits at 2k(1+eps) <= 1; a, r, d come from the closed
    forms for each regime, the base level from the matching choice, and
    higher levels from the geometric recursion.  K is the deepest level
    whose prime budgets still fit under 1 - log log T / log T.
    """
    if not k > 0.0:
        raise ValueError("need k > 0")
    if not 0.0 < eps < min(1.0, 1.0 / (4.0 * k)):
        raise ValueError("need 0 < eps < min(1, 1/(4k))")
    if not delta > 0.0:
        raise ValueError("need delta > 0")
    t = dd.as_ext(T)
    if float(t) < 1.0e3:
        raise ValueError("need T >= 1e3")
    log_t = math.log(float(t))
    loglog = math.log(log_t)

    ke = k * eps
    small = 2.0 * k * (1.0 + eps) <= 1.0
    if small:
        a = (4.0 - 3.0 * ke) / (2.0 * (2.0 - ke))
        r = 2.0 / (2.0 - ke)
        d = (8.0 - 7.0 * ke) / (2.0 * (4.0 - 3.0 * ke))
        beta0 = a * (2.0 * d - 1.0) * loglog / ((1.0 + 2.0 * eps) * k * log_t)
        s0 = math.floor(a / beta0)
    else:
        a = (1.0 - 3.0 * ke) / (1.0 - 2.0 * ke)
        r = 1.0 / (1.0 - 2.0 * ke)
        d = (2.0 - 7.0 * ke) / (2.0 * (1.0 - 3.0 * ke))
        beta0 = ((2.0 * k + 2.0 * d - 1.0 - a * (2.0 * d - 1.0) / r)
                 * loglog / ((1.0 + delta) * k * log_t))
        s0 = math.floor(1.0 / beta0)
    if s0 < 1:
        raise InfeasibleLadderError(
            f"base block too coarse: s_0 = floor(a/beta_0) = {s0} < 1 "
            f"(beta_0 = {beta0:.6g})")

    # strict cap: largest grid value satisfying the closed condition
    c_strict: Optional[float] = None
    for c in _C_GRID:
        lhs, rhs = _condition_c_sides(c, a, r, d, log_t)
        if lhs <= rhs:
            c_strict = c
            break
    c_cap = c_strict if c_strict is not None else _C_GRID[0]

    if beta0 > c_cap:
        raise InfeasibleLadderError(
            f"beta_0 = {beta0:.6g} exceeds the largest admissible "
            f"cap c = {c_cap}")

    # grow the ladder while the cap and the prime budgets allow
    bound = 1.0 - loglog / log_t
    beta = [beta0]
    s = [s0]
    ell = [_ell_of(s0, d)]
    if not _prefix_ok(beta, ell, s, 0, bound):
        raise InfeasibleLadderError(
            f"prime budget violated at the base level: ell_0*beta_0 = "
            f"{ell[0] * beta[0]:.6g} > 1 - loglog T/log T = {bound:.6g}")
    while len(beta) < _MAX_LEVELS:
        nxt = r * beta[-1]
        if nxt > c_cap:
            break
        beta.append(nxt)
        s.append(math.floor(a / nxt))
        ell.append(_ell_of(s[-1], d))
        if not _prefix_ok(beta, ell, s, len(beta) - 1, bound):
            beta.pop()
            s.pop()
            ell.pop()
            break
    K = len(beta) - 1

    if c_strict is None:
        fits = [c for c in _C_GRID if c >= beta[K]]
        c = min(fits)
    else:
        c = c_strict
    Delta = tuple(b * log_t / (2.0 * math.pi) for b in beta)
    return LadderParams(
        regime="small_k" if small else "large_k", k=k, eps=eps,
        delta_margin=delta, a=a, r=r, d=d, c=c,
        c_strict=c_strict is not None, K=K, beta=tuple(beta),
        s=tuple(s), ell=tuple(ell), Delta=Delta, T=t)


# -- validation ---------------------------------------------------------

@dataclass(frozen=True)
class ConstraintCheck:
    name: str
    value: float
    bound: float
    slack: float      # bound - value; negative means violated
    ok: bool
    asserted: bool    # advisory checks report but do not gate


@dataclass(frozen=True)
class LadderReport:
    checks: Tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks if c.asserted)

    def violations(self) -> Tuple[ConstraintCheck, ...]:
        return tuple(c for c in self.checks if not c.ok)


def validate_ladder(params: LadderParams) -> LadderReport:
    """Re-derive every structural identity and budget; report slacks.

    Violations are entries, not exceptions, so a corrupted parameter set
    can be inspected.  The closed cap condition is advisory (asserted
    False): it fails for every desk-sized T.
    """
    p = params
    log_t = p.log_t
    bound = 1.0 - math.log(log_t) / log_t
    out: List[ConstraintCheck] = []

    def check(name, value, bound_, asserted=True, tol=0.0):
        slack = bound_ - value
        out.append(ConstraintCheck(name, value, bound_, slack,
                                   value <= bound_ + tol, asserted))

    target = 1.0 - p.k * p.eps if p.regime == "small_k" \
        else 1.0 - 4.0 * p.k * p.eps
    check("slope_identity", abs(p.a * (2.0 * p.d - 1.0) / p.r - target),
          _IDENTITY_TOL)

    base = p.a if p.regime == "small_k" else 1.0
    check("s_base_choice", abs(p.s[0] - math.floor(base / p.beta[0])), 0.0)
    for j in range(1, p.K + 1):
        check(f"beta_recurrence[{j}]",
              abs(p.beta[j] - p.r * p.beta[j - 1]), 0.0)
        check(f"s_choice[{j}]",
              abs(p.s[j] - math.floor(p.a / p.beta[j])), 0.0)
    for j in range(p.K + 1):
        even_and_sized = (p.ell[j] % 2 == 0
                          and p.ell[j] == _ell_of(p.s[j], p.d))
        check(f"ell_choice[{j}]", 0.0 if even_and_sized else 1.0, 0.0)
        check(f"delta_consistency[{j}]",
              abs(2.0 * math.pi * p.Delta[j] - p.beta[j] * log_t),
              _IDENTITY_TOL * abs(p.beta[j] * log_t))

    check("ladder_budget",
          math.fsum(p.ell[h] * p.beta[h] for h in range(p.K + 1)), bound)
    for j in range(p.K):
        head = math.fsum(p.ell[h] * p.beta[h] for h in range(j + 1))
        check(f"prefix_budget[{j}]",
              head + p.s[j + 1] * p.beta[j + 1], bound)
    check("cap", p.beta[p.K], p.c)
    lhs, rhs = _condition_c_sides(p.c, p.a, p.r, p.d, log_t)
    check("cap_condition_closed", lhs, rhs, asserted=False)
    return LadderReport(tuple(out))


# -- truncated exponentials ---------------------------------------------

def trunc_exp(ell: int, z: complex) -> complex:
    """Partial exponential sum through degree ell, evaluated by Horner."""
    if ell < 2 or ell % 2:
        raise ValueError("need ell even and >= 2")
    acc = complex(1.0)
    for s in range(ell, 0, -1):
        acc = 1.0 + z * acc / s
    return acc


def _trunc_exp_vec(ell: int, z: np.ndarray) -> np.ndarray:
    acc = np.ones_like(z)
    for s in range(ell, 0, -1):
        acc = 1.0 + z * acc / s
    return acc


def trunc_exp_inequality_scan(ell: int, samples: int, seed: int = 0,
                              boundary: bool = False,
                              radius_scale: float = 1.0) -> float:
    """Worst ratio of e^Re(z) to max{1, |E_ell(z)|(1+1/(15 e^ell))} on
    the disk |z| <= ell/e^2.

    Uniform on the disk by default; boundary=True scans the rim instead.
    A ratio above 1 + 1e-12 raises with the witness point.  The
    guarantee only covers radius_scale 1.0; larger scales probe beyond
    the proven disk, where the inequality does fail.
    """
    if ell < 2 or ell % 2:
        raise ValueError("need ell even and >= 2")
    radius = radius_scale * ell / math.exp(2.0)
    if boundary:
        ang = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
        z = radius * np.exp(1j * ang)
    else:
        rng = np.random.default_rng(seed)
        rad = radius * np.sqrt(rng.random(samples))
        ang = 2.0 * math.pi * rng.random(samples)
        z = rad * np.exp(1j * ang)
    guard = 1.0 + 1.0 / (15.0 * math.exp(ell))
    denom = np.maximum(1.0, np.abs(_trunc_exp_vec(ell, z)) * guard)
    ratio = np.exp(z.real) / denom
    worst = int(np.argmax(ratio))
    if ratio[worst] > 1.0 + 1e-12:
        raise PropertyViolationError(
            f"exponential-majorant inequality fails at z = {z[worst]!r}: "
            f"ratio = {ratio[worst]!r}")
    return float(ratio[worst])


# -- the multinomial identity ------------------------------------------

def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def power_identity_check(interval: Tuple[float, float], s: int,
                         a: Dict[int, Fraction]) -> bool:
    """Exact check of (sum_p a(p))^s = s! sum_{Omega(n)=s} a(n) nu(n).

    a extends completely multiplicatively; nu(p^j) = 1/j!.  Both sides
    are exact rationals over the primes in (lo, hi].
    """
    lo, hi = interval
    primes = [p for p in range(max(2, math.floor(lo) + 1),
                               math.floor(hi) + 1) if _is_prime(p)]
    if len(primes) > 8 or not 1 <= s <= 6:
        raise ResourceLimitError(
            "exact check capped at 8 primes and s <= 6")
    missing = [p for p in primes if p not in a]
    if missing:
        raise ValueError(f"no coefficient for primes {missing}")
    coeff = {p: Fraction(a[p]) for p in primes}

    lhs = sum(coeff.values(), Fraction(0)) ** s
    rhs = Fraction(0)
    for combo in combinations_with_replacement(primes, s):
        term = Fraction(1)
        mult: Dict[int, int] = {}
        for p in combo:
            term *= coeff[p]
            mult[p] = mult.get(p, 0) + 1
        for e in mult.values():
            term /= math.factorial(e)
        rhs += term
    rhs *= math.factorial(s)
    return lhs == rhs


# -- coefficient models -------------------------------------------------

def eta_of(delta: float, log_t: float) -> int:
    """Exponent dichotomy: 1 below the log T scale, 0 at or above it."""
    return 1 if 2.0 * math.pi * delta < log_t else 0


def coeff_cap(delta: float, log_t: float) -> float:
    """Cap b(Delta): 1/2 + eps below the log T scale, else the
    geometric-series value 1/(1 - e^(-2 pi Delta / log T))."""
    if 2.0 * math.pi * delta < log_t:
        return 0.5 + _B_EPS
    return 1.0 / (1.0 - math.exp(-2.0 * math.pi * delta / log_t))


def cap_bound(delta: float, log_t: float) -> float:
    """The full cap b(Delta) * (log(log T / Delta))^eta(Delta)."""
    return coeff_cap(delta, log_t) * math.log(
        log_t / delta) ** eta_of(delta, log_t)


@dataclass(frozen=True)
class CoefficientModel:
    """Prime coefficients b(p; Delta), pluggable by name.

    b_of(p, delta, log_t) returns the coefficient.  The default
    surrogate is the cap itself (p-independent), so any inequality that
    depends only on the cap is evaluated faithfully.
    """

    name: str
    b_of: Callable[[int, float, float], float]

    @classmethod
    def surrogate(cls) -> "CoefficientModel":
        return cls("surrogate",
                   lambda p, delta, log_t: cap_bound(delta, log_t))

    @classmethod
    def zero(cls) -> "CoefficientModel":
        return cls("zero", lambda p, delta, log_t: 0.0)

    @classmethod
    def by_name(cls, name: str) -> "CoefficientModel":
        try:
            return {"surrogate": cls.surrogate, "zero": cls.zero}[name]()
        except KeyError:
            raise ValueError(f"unknown coefficient model {name!r}") from None

    def respects_cap(self, params: LadderParams,
                     tables: ArithmeticTables) -> bool:
        """|b(p; Delta_j)| <= cap for every prime in range, every level."""
        log_t = params.log_t
        top = params.interval(params.K)[1]
        stop = int(np.searchsorted(tables.primes, top, side="right"))
        for j, delta in enumerate(params.Delta):
            cap = cap_bound(delta, log_t)
            for p in tables.primes[:stop]:
                if abs(self.b_of(int(p), delta, log_t)) > cap + 1e-15:
                    return False
        return True


# -- prime block polynomials -------------------------------------------

def p_uv_eval(gamma, u: int, v: int, params: LadderParams,
              model: CoefficientModel, tables: ArithmeticTables) -> complex:
    """P_{u,v} at one ordinate: sum of b(p; Delta_v) p^(-1/2-1/log T-i*gamma)
    over primes in block u, phases in double-word arithmetic."""
    if not 0 <= u <= v <= params.K:
        raise ValueError("need 0 <= u <= v <= K")
    lo, hi = params.interval(u)
    if hi > tables.limit:
        raise ResourceLimitError(
            f"block top T^beta_{u} = {hi:.6g} exceeds the sieve limit "
            f"{tables.limit}")
    if hi > _LOGN_BUDGET:
        raise ResourceLimitError("block top exceeds the dense log table")
    i0 = int(np.searchsorted(tables.primes, lo, side="right"))
    i1 = int(np.searchsorted(tables.primes, hi, side="right"))
    ps = tables.primes[i0:i1].astype(np.int64)
    if len(ps) == 0:
        return complex(0.0)
    g = dd.as_ext(gamma)
    log_t = params.log_t
    delta = params.Delta[v]
    lh, ll, _ = logn_table(int(ps[-1]))
    ph, pl = dd.v_two_prod(np.full(len(ps), g.hi), lh[ps])
    pl = pl + g.hi * ll[ps] + g.lo * lh[ps]
    ph, pl = dd.v_quick_two_sum(ph, pl)
    rh, rl = dd.v_dd_mod_2pi(ph, pl)
    amp = ps.astype(np.float64) ** (-0.5 - 1.0 / log_t)
    b = np.array([model.b_of(int(p), delta, log_t) for p in ps])
    w = b * amp
    re = math.fsum(w * dd.v_cos_reduced(rh, rl))
    im = -math.fsum(w * dd.v_sin_reduced(rh, rl))
    return complex(re, im)


@dataclass(frozen=True)
class GammaClass:
    """Trichotomy label: outside the base set, inside every set, or the
    level j at which membership first fails."""

    label: str            # "not_T0" | "T_prime" | "S_j"
    j: Optional[int] = None


def classify_gamma(gamma, params: LadderParams, model: CoefficientModel,
                   tables: ArithmeticTables) -> GammaClass:
    """Exactly one of: not in the base set, in every set, or S_j."""
    in_set = []
    for u in range(params.K + 1):
        biggest = max(abs(p_uv_eval(gamma, u, v, params, model, tables))
                      for v in range(u, params.K + 1))
        in_set.append(biggest <= params.threshold(u))
    if not in_set[0]:
        return GammaClass("not_T0")
    if all(in_set):
        return GammaClass("T_prime")
    first_out = in_set.index(False)
    return GammaClass("S_j", first_out - 1)


# -- the S1/S2 majorant -------------------------------------------------

def _osc_slack(delta: float, t: float) -> float:
    """The displayed O-argument, instantiated with constant 1."""
    return (delta ** 2 * math.exp(math.pi * delta) / (1.0 + delta * t)
            + delta * math.log(1.0 + delta * math.sqrt(t)) / math.sqrt(t)
            + 1.0)


def _e_factor(params: LadderParams, gamma, h: int, top: int,
              model: CoefficientModel, tables: ArithmeticTables) -> float:
    e = trunc_exp(params.ell[h],
                  params.k * p_uv_eval(gamma, h, top, params, model, tables))
    guard = (1.0 + 1.0 / (15.0 * math.exp(params.ell[h]))) ** 2
    return max(1.0, abs(e) ** 2 * guard)


def s1_s2_eval(gamma, params: LadderParams, model: CoefficientModel,
               tables: ArithmeticTables) -> Dict[str, float]:
    """The two-part majorant of |zeta(1/2 + 1/log T + i*gamma)|^(-2k).

    S1 carries the full product of truncated-exponential factors at the
    top level; S2 sums the escape terms over j < K.  Every O-slot is
    instantiated with constant 1.
    """
    p = params
    t = float(p.T)
    log_t = p.log_t
    loglog = math.log(log_t)
    pref = loglog ** p.k

    def level_weight(j: int) -> float:
        return ((1.0 / (1.0 - math.exp(-p.beta[j]))) ** (2.0 * p.k / p.beta[j])
                * math.exp(2.0 * p.k * math.log(log_t / p.Delta[j])
                           ** eta_of(p.Delta[j], log_t))
                * math.exp(_osc_slack(p.Delta[j], t)))

    prod = 1.0
    for h in range(p.K + 1):
        prod *= _e_factor(p, gamma, h, p.K, model, tables)
    s1 = pref * level_weight(p.K) * prod

    s2 = 0.0
    for j in range(p.K):
        prod_j = 1.0
        for h in range(j + 1):
            prod_j *= _e_factor(p, gamma, h, j, model, tables)
        esc = 0.0
        for v in range(j + 1, p.K + 1):
            pv = abs(p_uv_eval(gamma, j + 1, v, params, model, tables))
            esc += (p.k * math.exp(2.0) / p.ell[j + 1] * pv) \
                ** (2 * p.s[j + 1])
        s2 += level_weight(j) * prod_j * esc
    s2 *= pref
    return {"S1": s1, "S2": s2}


# -- the derivative decomposition --------------------------------------

@dataclass(frozen=True)
class KirilaReport:
    """Pieces of the log-derivative identity at one zero.

    discrepancy is the measured O(1) slot: the identity residual
    divided by alpha = 1/log T.  tail_estimate covers the pair sum
    beyond the truncation window and is not folded into discrepancy.
    """

    index: int
    gamma: float
    lhs: float            # log |Z'(gamma)|
    zeta_term: float      # log |zeta(1/2 + alpha + i*gamma)|
    slope_term: float     # alpha * log(T)/2
    alpha_term: float     # -log(alpha)
    pair_sum: float       # the truncated half-sum over other zeros
    tail_estimate: float
    m1_count: int
    m2_sum: float
    discrepancy: float


def kirila_decomposition_check(n: int, cache: ZeroCache,
                               H: float = 50.0) -> KirilaReport:
    """Split log |zeta'(rho_n)| into the off-line zeta value, the slope
    and scale terms, and the truncated sum over neighbouring zeros.

    Every zero within H of gamma_n must be in the certified cache; the
    remainder of the pair sum is estimated analytically and reported on
    its own.
    """
    if H < 10.0:
        raise ValueError("need a truncation window H >= 10")
    if not cache.certified:
        raise WindowError("cache is not certified")
    pos = n - int(cache.index[0])
    if not 0 <= pos < len(cache.index):
        raise ValueError(f"zero {n} not in cache")
    gam = float(cache.gamma_hi[pos] + cache.gamma_lo[pos])
    if gam + H > float(cache.height_hi) or (
            float(cache.height_lo) > 0.0
            and gam - H < float(cache.height_lo)):
        raise WindowError(
            f"zero {n} needs padding {H} on both sides of the cache")

    log_t = math.log(gam)
    alpha = 1.0 / log_t
    ds = (cache.gamma_hi - gam) + cache.gamma_lo
    near = np.flatnonzero((np.abs(ds) <= H) & (cache.index != np.uint64(n)))
    dd2 = ds[near] ** 2
    pair_sum = 0.5 * math.fsum(np.log1p(alpha ** 2 / dd2))
    m1_count = int(np.count_nonzero(np.abs(ds[near]) < alpha))
    m2_sum = math.fsum(np.log1p(alpha ** 2 / dd2[np.abs(ds[near]) >= alpha]))

    density = math.log(gam / (2.0 * math.pi)) / (2.0 * math.pi)
    tail = 2.0 * alpha ** 2 * density / H

    z = zeta_em_batch(0.5 + alpha, np.array([gam]))[0]
    zeta_term = math.log(abs(z))
    slope_term = alpha * log_t / 2.0
    alpha_term = -math.log(alpha)
    lhs = math.log(float(cache.zprime_hi[pos] + cache.zprime_lo[pos]))
    resid = lhs - (zeta_term + slope_term + alpha_term - pair_sum)
    return KirilaReport(
        index=n, gamma=gam, lhs=lhs, zeta_term=zeta_term,
        slope_term=slope_term, alpha_term=alpha_term, pair_sum=pair_sum,
        tail_estimate=tail, m1_count=m1_count, m2_sum=m2_sum,
        discrepancy=resid / alpha)


def pointwise_bound_check(gamma, cache: ZeroCache, eps: float) -> float:
    """Ratio of 1/|zeta(1/2 + 1/log T + i*gamma)| to its closed bound.

    The bound's T is the ordinate itself.  The returned ratio should be
    well below 1 at reachable heights.
    """
    if eps <= 0.0:
        raise ValueError("need eps > 0")
    if not cache.certified:
        raise WindowError("cache is not certified")
    g = float(dd.as_ext(gamma))
    if not float(cache.height_lo) <= g <= float(cache.height_hi):
        raise WindowError("ordinate outside the certified range")
    log_t = math.log(g)
    loglog = math.log(log_t)
    z = zeta_em_batch(0.5 + 1.0 / log_t, np.array([g]))[0]
    lhs = 1.0 / abs(z)
    base = 1.0 / (1.0 - log_t ** (-2.0 / log_t))
    rhs = base ** ((1.0 + eps) * log_t / (2.0 * loglog))
    return lhs / rhs
