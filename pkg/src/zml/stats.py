"""Observable statistics over a certified zero cache.

N(T), the argument function S(t) = N(t) - 1 - theta(t)/pi, close-pair
subfamilies of ordinates, discrete moments of |zeta'| over zeros, and
power-law fits of those moments against log T.

Every operation demands a certified cache and stays inside its height
range; sums are compensated per shard and combined in a fixed shard
order, so results do not depend on how callers parallelise.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from . import ddmath as dd
from .cache import ZeroCache
from .ddmath import ExtReal
from .special import rs_theta_batch

HAZARD_FLOOR = 1e-8  # |Z'| at or below this makes negative powers junk
_AMBIGUITY = 1e-10
_S_SANITY = 4.0
_T_FLOOR = 10.0  # theta-series floor; S and gap thresholds need t >= this
_SHARDS = 64


class AmbiguityError(ValueError):
    """t sits on a zero, where S(t) is genuinely two-valued."""


class WindowError(ValueError):
    """Range not certified, out of bounds, or missing gap padding."""


class HazardError(ValueError):
    """A zero's |Z'| is too small to raise to a negative power."""


class FitError(ValueError):
    """Fit grid too small or too clustered to condition a slope."""


# -- family specifications ---------------------------------------------

def _guarded_logloglog(T: float) -> float:
    v = math.log(T)
    if v <= 1.0:
        return 1.0
    v = math.log(v)
    if v <= 1.0:
        return 1.0
    return max(1.0, math.log(v))


def _guarded_loglog(T: float) -> float:
    v = math.log(T)
    if v <= 1.0:
        return 1.0
    return max(1.0, math.log(v))


_F_CHOICES: Dict[str, Callable[[float], float]] = {
    "logloglog": _guarded_logloglog,
    "loglog": _guarded_loglog,
}


@dataclass(frozen=True)
class FamilySpec:
    """Which ordinates count: everything, or only well-separated ones.

    `F` keeps ordinates whose gap to both neighbours is at least
    c_gap/log T; `F_enl` uses the larger threshold
    exp(-sqrt(log T)/(f(T) sqrt(log log T))) with a named slow-growing
    f, guarded >= 1.
    """

    kind: str = "full"
    c_gap: float = 1.0
    f_choice: str = "logloglog"

    def __post_init__(self):
        if self.kind not in ("full", "F", "F_enl"):
            raise ValueError(f"unknown family kind {self.kind!r}")
        if not self.c_gap > 0.0:
            raise ValueError("c_gap must be positive")
        if self.f_choice not in _F_CHOICES:
            raise ValueError(f"unknown f_choice {self.f_choice!r}; "
                             f"have {sorted(_F_CHOICES)}")

    def threshold(self, T: float) -> float:
        """Minimum neighbour gap at reference height T."""
        if self.kind == "full":
            return 0.0
        if T < _T_FLOOR:
            raise WindowError(
                f"gap threshold needs reference height >= {_T_FLOOR}")
        if self.kind == "F":
            return self.c_gap / math.log(T)
        f = _F_CHOICES[self.f_choice](T)
        lt = math.log(T)
        return math.exp(-math.sqrt(lt) / (f * math.sqrt(math.log(lt))))


@dataclass(frozen=True)
class FamilySplit:
    included: np.ndarray  # absolute zero indices
    excluded: np.ndarray
    threshold: float


@dataclass(frozen=True)
class MomentReport:
    k: float
    T: ExtReal
    family: FamilySpec
    window: Tuple[ExtReal, ExtReal]
    J: ExtReal
    zero_count_used: int
    zero_count_excluded: int
    comparison: Optional[Dict[str, float]] = None

    def __post_init__(self):
        if float(self.J) < 0.0:
            raise ValueError("J must be nonnegative")
        if self.zero_count_used < 0 or self.zero_count_excluded < 0:
            raise ValueError("counts must be nonnegative")


@dataclass(frozen=True)
class ScanReport:
    max_abs_s: float
    argmax: float
    ratio_to_sqrt_envelope: float  # vs sqrt(log t log log t)
    ratio_to_littlewood_envelope: float  # vs log t / log log t


@dataclass(frozen=True)
class FitReport:
    exponent: float
    target: float
    grid: Tuple[float, ...]
    values: Tuple[float, ...]  # J/T per grid point
    residuals: Tuple[float, ...]


# -- counting and S(t) -------------------------------------------------

def _require_certified(cache: ZeroCache) -> None:
    if not cache.certified:
        raise WindowError("cache is not certified; certify before querying")


def _require_in_range(cache: ZeroCache, t: ExtReal) -> None:
    if not (cache.height_lo <= t <= cache.height_hi):
        raise WindowError(
            f"t={float(t)!r} outside the certified range "
            f"({float(cache.height_lo)!r}, {float(cache.height_hi)!r}]")


def _count_at(cache: ZeroCache, t: ExtReal) -> int:
    base = int(cache.index[0]) - 1
    pos = int(np.searchsorted(cache.gamma_hi, t.hi, side="right"))
    while (pos > 0 and cache.gamma_hi[pos - 1] == t.hi
           and cache.gamma_lo[pos - 1] > t.lo):
        pos -= 1
    return base + pos


def count_N(T, cache: ZeroCache) -> int:
    """Number of ordinates in (0, T], from the certified cache."""
    t = dd.as_ext(T)
    _require_certified(cache)
    _require_in_range(cache, t)
    return _count_at(cache, t)


def s_of_t(t, cache: ZeroCache) -> ExtReal:
    """S(t) = N(t) - 1 - theta(t)/pi; jumps by +1 across each zero."""
    te = dd.as_ext(t)
    _require_certified(cache)
    _require_in_range(cache, te)
    if te.hi < _T_FLOOR:
        raise WindowError(f"S(t) evaluation needs t >= {_T_FLOOR}")
    pos = int(np.searchsorted(cache.gamma_hi, te.hi, side="right"))
    for p in (pos - 1, pos):
        if 0 <= p < len(cache):
            gap = abs((te.hi - cache.gamma_hi[p]) + (te.lo - cache.gamma_lo[p]))
            if gap <= _AMBIGUITY:
                raise AmbiguityError(
                    f"t is within {_AMBIGUITY} of zero "
                    f"#{int(cache.index[p])}; perturb the ordinate")
    n = _count_at(cache, te)
    th, tl = rs_theta_batch(np.array([te.hi]), np.array([te.lo]))
    s = dd.as_ext(float(n - 1)) - ExtReal(th[0], tl[0]) / dd.PI
    if abs(float(s)) >= _S_SANITY:
        raise ArithmeticError(
            f"|S({float(te)!r})| = {float(s):.3f} >= {_S_SANITY}; "
            "cache contents inconsistent with theta")
    return s


def s_max_scan(t_lo, t_hi, cache: ZeroCache) -> ScanReport:
    """Supremum of |S| over [t_lo, t_hi] and its envelope ratios.

    Between zeros S decreases smoothly, so the supremum is attained at
    a one-sided limit at some zero (or at an endpoint); it is computed
    exactly from the stored ordinates.
    """
    lo = dd.as_ext(t_lo)
    hi = dd.as_ext(t_hi)
    _require_certified(cache)
    _require_in_range(cache, lo)
    _require_in_range(cache, hi)
    if not lo < hi:
        raise WindowError("need t_lo < t_hi")
    if lo.hi < _T_FLOOR:
        raise WindowError(f"scan needs t_lo >= {_T_FLOOR}")
    base = int(cache.index[0]) - 1
    p0 = _count_at(cache, lo) - base
    p1 = _count_at(cache, hi) - base
    cand_s = []
    cand_t = []
    if p1 > p0:
        g_h = cache.gamma_hi[p0:p1]
        g_l = cache.gamma_lo[p0:p1]
        idx = cache.index[p0:p1].astype(np.float64)
        th, tl = rs_theta_batch(g_h, g_l)
        s_plus = (idx - 1.0) - (th / math.pi + tl / math.pi)
        cand_s.extend([s_plus, s_plus - 1.0])
        cand_t.extend([g_h, g_h])
    for end in (lo, hi):
        n = _count_at(cache, end)
        th, tl = rs_theta_batch(np.array([end.hi]), np.array([end.lo]))
        cand_s.append(np.array([(n - 1.0) - (th[0] / math.pi + tl[0] / math.pi)]))
        cand_t.append(np.array([end.hi]))
    s_all = np.concatenate(cand_s)
    t_all = np.concatenate(cand_t)
    at = int(np.argmax(np.abs(s_all)))
    m = float(np.abs(s_all)[at])
    t_star = float(t_all[at])
    lt = math.log(t_star)
    llt = math.log(lt)
    return ScanReport(m, t_star,
                      m / math.sqrt(lt * llt),
                      m / (lt / llt))


# -- families and moments ----------------------------------------------

def family_filter(cache: ZeroCache, spec: FamilySpec, window) -> FamilySplit:
    """Split the window's ordinates by the neighbour-gap criterion.

    Gap families need one zero of padding on each side of the window
    inside the cache, so both neighbour gaps of every member are known;
    the reference height for the threshold is the window's lower
    endpoint.
    """
    lo = dd.as_ext(window[0])
    hi = dd.as_ext(window[1])
    _require_certified(cache)
    if not lo < hi:
        raise WindowError("need window lower endpoint below upper")
    if not (cache.height_lo <= lo and hi <= cache.height_hi):
        raise WindowError("window outside the certified range")
    i0 = int(np.searchsorted(cache.gamma_hi, lo.hi, side="right"))
    i1 = int(np.searchsorted(cache.gamma_hi, hi.hi, side="right"))
    members = cache.index[i0:i1].astype(np.int64)
    if spec.kind == "full" or i0 == i1:
        return FamilySplit(members, members[:0], 0.0)
    thr = spec.threshold(float(lo))
    if i0 == 0 or i1 == len(cache):
        raise WindowError(
            "window touches the cache boundary; gap families need one "
            "zero of padding on each side")
    gam = cache.gamma_hi + cache.gamma_lo
    gap_prev = gam[i0:i1] - gam[i0 - 1:i1 - 1]
    gap_next = gam[i0 + 1:i1 + 1] - gam[i0:i1]
    keep = np.minimum(gap_prev, gap_next) >= thr
    return FamilySplit(members[keep], members[~keep], thr)


def sharded_total(values: np.ndarray) -> ExtReal:
    """Deterministic compensated sum: fixed shards, fixed combine order.

    Shard boundaries depend only on the length, each shard is summed
    exactly, and the partials are combined left to right in double-word
    arithmetic, so the result is independent of caller parallelism.
    """
    if len(values) == 0:
        return ExtReal(0.0)
    bounds = np.linspace(0, len(values), _SHARDS + 1).astype(np.int64)
    total = ExtReal(0.0)
    for i in range(_SHARDS):
        part = math.fsum(values[bounds[i]:bounds[i + 1]])
        total = total + part
    return total


def discrete_moment(cache: ZeroCache, k: float, window,
                    spec: Optional[FamilySpec] = None) -> MomentReport:
    """J_{-k} over the window: sum of |Z'(gamma)|^(-2k) on the family.

    k > 0 are the negative moments (simple zeros needed; tiny |Z'| is a
    hazard, not data), k < 0 the positive ones, k = 0 the cardinality.
    """
    if spec is None:
        spec = FamilySpec()
    lo = dd.as_ext(window[0])
    hi = dd.as_ext(window[1])
    split = family_filter(cache, spec, (lo, hi))
    base = int(cache.index[0])
    pos = (split.included - base).astype(np.int64)
    zp = cache.zprime_hi[pos] + cache.zprime_lo[pos]
    if k > 0 and len(zp):
        bad = zp <= HAZARD_FLOOR
        if np.any(bad):
            raise HazardError(
                f"|Z'| at or below {HAZARD_FLOOR} at zero(s) "
                f"{split.included[bad].tolist()}; negative powers "
                "would be dominated by ordinate error")
    terms = zp ** (-2.0 * k)
    J = sharded_total(terms)
    T = hi if float(lo) <= 0.0 else lo
    return MomentReport(k, T, spec, (lo, hi), J,
                        len(split.included), len(split.excluded))


def gonek_ratio(cache: ZeroCache, T) -> float:
    """J_{-1} over (0, T], full family, against its conjectured (3/pi^3) T."""
    rep = discrete_moment(cache, 1.0, (0.0, T))
    model = (3.0 / math.pi ** 3) * float(T)
    return float(rep.J) / model


def conjecture_fit(cache: ZeroCache, k: float, T_grid: Sequence[float],
                   spec: Optional[FamilySpec] = None,
                   window: str = "cumulative") -> FitReport:
    """Least-squares exponent of log(J/T) against log log T.

    The moment growth target is (k-1)^2 powers of log T; `window`
    chooses (0, T] per grid point ("cumulative") or (T, 2T]
    ("dyadic").
    """
    grid = sorted(float(T) for T in T_grid)
    if len(grid) < 3:
        raise FitError("need at least 3 grid points")
    x = np.array([math.log(math.log(T)) for T in grid])
    if x[-1] - x[0] < 0.1:
        raise FitError(
            f"log log T spread {x[-1] - x[0]:.3f} < 0.1; grid too "
            "clustered to condition the slope")
    if window not in ("cumulative", "dyadic"):
        raise ValueError(f"unknown window kind {window!r}")
    values = []
    for T in grid:
        win = (0.0, T) if window == "cumulative" else (T, 2.0 * T)
        rep = discrete_moment(cache, k, win, spec)
        if float(rep.J) <= 0.0:
            raise FitError(f"window at T={T} has no included zeros")
        values.append(float(rep.J) / T)
    y = np.log(values)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    return FitReport(float(slope), (k - 1.0) ** 2, tuple(grid),
                     tuple(values), tuple(resid))


def zero_sum_partial(cache: ZeroCache, T) -> ExtReal:
    """Partial sum of 1/(|rho|^2 |Z'(gamma)|^2) over ordinates in (0, T]."""
    t = dd.as_ext(T)
    _require_certified(cache)
    _require_in_range(cache, t)
    if float(cache.height_lo) > 0.0:
        raise WindowError("partial zero sums need a bottom-anchored cache")
    n = _count_at(cache, t)
    gam = cache.gamma_hi[:n] + cache.gamma_lo[:n]
    zp = cache.zprime_hi[:n] + cache.zprime_lo[:n]
    bad = zp <= HAZARD_FLOOR
    if np.any(bad):
        raise HazardError(
            f"|Z'| at or below {HAZARD_FLOOR} at zero(s) "
            f"{cache.index[:n][bad].tolist()}")
    terms = 1.0 / ((0.25 + gam * gam) * zp * zp)
    return sharded_total(terms)
