"""Isolation, refinement, and count certification of the zeros of Z.

The scan walks Gram intervals.  Gram's law (one zero per interval) fails
a few percent of the time, so the unit of bookkeeping is the Rosser
block: a run of intervals between consecutive "good" Gram points g_n
with (-1)^n Z(g_n) > 0, which is expected to hold exactly as many zeros
as intervals.  A block that does not show the expected number of sign
changes is subdivided progressively (up to 64 samples per interval,
which separates the closest known pairs well beyond the heights handled
here), then merged with neighbours, and only then reported as a failure.

Bracketed zeros are polished in three stages: bisection to ~1e-4, a
guarded Illinois secant to the float64 floor, then Newton steps with
double-word ordinates, since the refinement target of 1e-12 lies below
one ulp of t already at t ~ 3e4.

Certification follows Turing's method: the stored count is compared with
theta(g_n)/pi + 1 at every Gram point, and the integral of S(t) over a
trailing window is checked against the classical bound.  The window
integral pins the absolute count: a single missed zero below the window
shifts it by the window length, two orders of magnitude above the bound.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import ddmath as dd
from .cache import ZeroCache, ZeroRecord
from .ddmath import ExtReal
from .special import hardy_z_batch, hardy_z_prime_batch, rs_theta_batch

# Z's evaluation floor; (0, 10] contains no zeros, so a scan starting
# here counts from zero.
SCAN_FLOOR = 10.0

_CHUNK = 4096        # Gram intervals per scan chunk
_MAX_SUBDIV = 64     # per-interval subdivision ceiling
_ANCHOR_PAD = 96     # search radius for a good anchor Gram point
_NEWTON_TOL = 1e-12  # final double-word Newton correction bound
_ZPRIME_FLOOR = 1e-8  # below this |Z'| is a simplicity hazard, not data

# Turing window: |integral of S over (t1, t2)| <= A + B log(t2/2pi) for
# t2 above 168 pi.
_TURING_A = 2.30
_TURING_B = 0.128
_TURING_MIN_T = 168.0 * math.pi


class CertificationError(RuntimeError):
    """A Gram block whose zero count could not be reconciled."""


# -- Gram points -------------------------------------------------------

def _theta_prime(t: np.ndarray) -> np.ndarray:
    return 0.5 * np.log(t / (2.0 * math.pi)) - 1.0 / (48.0 * t * t)


def _gram_points(ns) -> Tuple[np.ndarray, np.ndarray]:
    """Double-word solutions of theta(g_n) = n pi, vectorised."""
    ns = np.asarray(ns, dtype=np.float64)
    if ns.size and float(np.min(ns)) < 0:
        raise ValueError("Gram indices must be >= 0")
    # Seed from the main term: with t = 2 pi u, theta = n pi becomes
    # u (log u - 1) = n + 1/8.  f is convex and u0 = e + m starts above
    # the root, so Newton descends monotonically.
    m = ns + 0.125
    u = math.e + m
    for _ in range(50):
        step = (u * (np.log(u) - 1.0) - m) / np.log(u)
        u = u - step
        if float(np.max(np.abs(step))) < 1e-12 * float(np.max(u)):
            break
    else:
        raise ArithmeticError("gram point seed iteration did not converge")
    t = 2.0 * math.pi * u
    npi_h, npi_l = dd.v_two_prod(ns, dd.PI.hi)
    npi_l = npi_l + ns * dd.PI.lo
    npi_h, npi_l = dd.v_quick_two_sum(npi_h, npi_l)
    for _ in range(50):
        th, tl = rs_theta_batch(t)
        step = ((th - npi_h) + (tl - npi_l)) / _theta_prime(t)
        t = t - step
        if float(np.max(np.abs(step))) < 1e-8:
            break
    else:
        raise ArithmeticError("gram point Newton did not converge")
    # one double-word polish: the 1e-10 residual target sits below one
    # ulp of theta once t passes ~1e5
    th, tl = rs_theta_batch(t)
    rh, rl = dd.v_dd_sub(th, tl, npi_h, npi_l)
    delta = (rh + rl) / _theta_prime(t)
    g_h, g_l = dd.v_two_sum(t, -delta)
    return g_h, g_l


def gram_point(n: int) -> ExtReal:
    """The Gram point g_n, the solution of theta(g_n) = n pi."""
    if n < 0:
        raise ValueError(f"Gram index must be >= 0, got {n}")
    g_h, g_l = _gram_points(np.array([float(n)]))
    th, tl = rs_theta_batch(g_h, g_l)
    res = dd.sub(ExtReal(th[0], tl[0]),
                 dd.mul(dd.PI, ExtReal.from_int(int(n))))
    if abs(float(res)) > 1e-10:
        raise ArithmeticError(
            f"gram_point({n}) residual {float(res):.3e} exceeds 1e-10")
    return ExtReal(g_h[0], g_l[0])


# -- block scanning ----------------------------------------------------

@dataclass(eq=False)
class _Block:
    """A run of Gram intervals between good Gram points (or the scan
    floor), with Z already sampled at the interval edges."""

    n_left: int            # Gram index of the left edge; -1 = scan floor
    n_right: int
    edges: np.ndarray      # interval-edge ordinates, ascending
    z_edges: np.ndarray
    expected: int
    consumed: bool = False
    brackets: Optional[Tuple[np.ndarray, np.ndarray,
                             np.ndarray, np.ndarray]] = field(default=None)


def _count_brackets(x: np.ndarray, z: np.ndarray
                    ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    s = np.sign(z)
    s[s == 0.0] = 1.0
    flip = np.nonzero(s[:-1] * s[1:] < 0.0)[0]
    return x[flip], x[flip + 1], z[flip], z[flip + 1]


def _block_grid(edges: np.ndarray, density: int) -> np.ndarray:
    segs = [np.linspace(edges[i], edges[i + 1], density + 1)[:-1]
            for i in range(len(edges) - 1)]
    segs.append(edges[-1:])
    return np.concatenate(segs)


def _resolve_block(block: _Block) -> bool:
    """Subdivide until the sign-change count matches; True on success."""
    lo, hi, zlo, zhi = _count_brackets(block.edges, block.z_edges)
    if len(lo) == block.expected:
        block.brackets = (lo, hi, zlo, zhi)
        return True
    density = 2
    while density <= _MAX_SUBDIV:
        x = _block_grid(block.edges, density)
        z = hardy_z_batch(x)
        lo, hi, zlo, zhi = _count_brackets(x, z)
        if len(lo) == block.expected:
            block.brackets = (lo, hi, zlo, zhi)
            return True
        density *= 2
    return False


def _merged(members: List[_Block]) -> _Block:
    return _Block(
        n_left=members[0].n_left,
        n_right=members[-1].n_right,
        edges=np.concatenate([members[0].edges]
                             + [b.edges[1:] for b in members[1:]]),
        z_edges=np.concatenate([members[0].z_edges]
                               + [b.z_edges[1:] for b in members[1:]]),
        expected=sum(b.expected for b in members))


def _merge_blocks(blocks: List[_Block], i: int) -> None:
    """Fold neighbours into blocks[i] until its count reconciles.

    A Rosser-rule violation displaces a zero into an adjacent block, so
    the combined range is expected to balance.  Three merges to each
    side before giving up is far beyond any known violation pattern.
    """
    bad = blocks[i]
    left, right = i, i
    while right - left < 6:
        if right + 1 < len(blocks):
            right += 1
        elif left > 0:
            left -= 1
        else:
            break
        trial = _merged(blocks[left:right + 1])
        if _resolve_block(trial):
            for b in blocks[left:right + 1]:
                b.consumed = True
            trial.consumed = False
            blocks[i] = trial
            return
        if left > 0:
            left -= 1
            trial = _merged(blocks[left:right + 1])
            if _resolve_block(trial):
                for b in blocks[left:right + 1]:
                    b.consumed = True
                trial.consumed = False
                blocks[i] = trial
                return
    raise CertificationError(
        f"Gram block ({bad.n_left}, {bad.n_right}) expected {bad.expected} "
        f"zero(s) between t={bad.edges[0]:.6f} and t={bad.edges[-1]:.6f}; "
        f"count not reconciled at subdivision depth {_MAX_SUBDIV} "
        f"with neighbour merging")


# -- refinement --------------------------------------------------------

def _refine_brackets(lo: np.ndarray, hi: np.ndarray,
                     zlo: np.ndarray, zhi: np.ndarray
                     ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Bisection, Illinois secant, then double-word Newton.

    Returns (gamma_hi, gamma_lo, zprime_abs); guarantees the last
    Newton correction was at most _NEWTON_TOL for every zero.
    """
    lo, hi = lo.copy(), hi.copy()
    zlo, zhi = zlo.copy(), zhi.copy()
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        zm = hardy_z_batch(mid)
        root_left = zlo * zm < 0.0
        hi = np.where(root_left, mid, hi)
        zhi = np.where(root_left, zm, zhi)
        lo = np.where(root_left, lo, mid)
        zlo = np.where(root_left, zlo, zm)
    # Illinois: regula falsi, halving the value at an endpoint retained
    # twice in a row so neither side goes stale
    prev = np.zeros(len(lo), dtype=np.int8)
    for _ in range(6):
        x = np.clip((lo * zhi - hi * zlo) / (zhi - zlo), lo, hi)
        zx = hardy_z_batch(x)
        root_left = zlo * zx < 0.0
        zlo = np.where(root_left & (prev == 1), 0.5 * zlo, zlo)
        zhi = np.where(~root_left & (prev == -1), 0.5 * zhi, zhi)
        hi = np.where(root_left, x, hi)
        zhi = np.where(root_left, zx, zhi)
        lo = np.where(root_left, lo, x)
        zlo = np.where(root_left, zlo, zx)
        prev = np.where(root_left, 1, -1).astype(np.int8)
    g_h = np.clip((lo * zhi - hi * zlo) / (zhi - zlo), lo, hi)
    g_l = np.zeros_like(g_h)
    zp = hardy_z_prime_batch(g_h)
    if not np.all(np.isfinite(zp)) or np.any(zp == 0.0):
        raise ArithmeticError("Z' vanished or overflowed during refinement")
    last = np.full(len(g_h), np.inf)
    for _ in range(6):
        z = hardy_z_batch(g_h, g_l)
        delta = z / zp
        g_h, g_l = dd.v_dd_sub(g_h, g_l, delta, np.zeros_like(delta))
        last = np.abs(delta)
        if float(np.max(last)) <= _NEWTON_TOL:
            break
    if float(np.max(last)) > _NEWTON_TOL:
        worst = int(np.argmax(last))
        raise ArithmeticError(
            f"zero refinement stalled near t={g_h[worst]:.6f}: "
            f"last correction {last[worst]:.3e}")
    return g_h, g_l, np.abs(zp)


# -- the scan ----------------------------------------------------------

def _good_mask(ns: np.ndarray, z: np.ndarray) -> np.ndarray:
    sign = np.where(ns.astype(np.int64) % 2 == 0, 1.0, -1.0)
    return sign * z > 0.0


def _scan_span(n_lo: int, n_hi: int, bottom: bool
               ) -> Tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Zeros in (g_{n_lo}, g_{n_hi}] (from the scan floor when bottom).

    Returns (gamma_hi, gamma_lo, zprime_abs, first_index).  Pure; spans
    may run concurrently, and the overlap near span edges recomputes
    bit-identically.
    """
    lo_ext = 0 if bottom else max(0, n_lo - _ANCHOR_PAD)
    hi_ext = n_hi + _ANCHOR_PAD
    ns = np.arange(lo_ext, hi_ext + 1)
    g_h, g_l = _gram_points(ns)
    zg = hardy_z_batch(g_h, g_l)
    good = _good_mask(ns, zg)
    if bottom:
        a_pos = None
    else:
        cand = np.nonzero(good[:n_lo - lo_ext + 1])[0]
        if len(cand) == 0:
            raise CertificationError(
                f"no good Gram point within {_ANCHOR_PAD} below index {n_lo}")
        a_pos = int(cand[-1])
    cand = np.nonzero(good[n_hi - lo_ext:])[0]
    if len(cand) == 0:
        raise CertificationError(
            f"no good Gram point within {_ANCHOR_PAD} above index {n_hi}")
    b_pos = int(cand[0]) + (n_hi - lo_ext)

    start = 0 if bottom else a_pos
    good_pos = np.nonzero(good[start:b_pos + 1])[0] + start
    blocks: List[_Block] = []
    if bottom:
        j = int(good_pos[0])
        blocks.append(_Block(
            n_left=-1, n_right=int(ns[j]),
            edges=np.concatenate(([SCAN_FLOOR], g_h[:j + 1])),
            z_edges=np.concatenate((hardy_z_batch(np.array([SCAN_FLOOR])),
                                    zg[:j + 1])),
            expected=int(ns[j]) + 1))
    for k in range(len(good_pos) - 1):
        i0, i1 = int(good_pos[k]), int(good_pos[k + 1])
        blocks.append(_Block(n_left=int(ns[i0]), n_right=int(ns[i1]),
                             edges=g_h[i0:i1 + 1],
                             z_edges=zg[i0:i1 + 1],
                             expected=i1 - i0))

    for i, b in enumerate(blocks):
        if b.brackets is None and not b.consumed and not _resolve_block(b):
            _merge_blocks(blocks, i)

    lo_parts, hi_parts, zlo_parts, zhi_parts = [], [], [], []
    for b in blocks:
        if b.consumed:
            continue
        bl, bh, zl, zh = b.brackets
        lo_parts.append(bl)
        hi_parts.append(bh)
        zlo_parts.append(zl)
        zhi_parts.append(zh)
    lo = np.concatenate(lo_parts)
    hi = np.concatenate(hi_parts)
    zlo = np.concatenate(zlo_parts)
    zhi = np.concatenate(zhi_parts)
    order = np.argsort(lo, kind="stable")
    gamma_h, gamma_l, zp = _refine_brackets(lo[order], hi[order],
                                            zlo[order], zhi[order])

    count_at_left = 0 if bottom else int(ns[a_pos]) + 1
    first_index = count_at_left + 1
    if bottom:
        left_h, left_l = SCAN_FLOOR, 0.0
    else:
        at = n_lo - lo_ext
        left_h, left_l = g_h[at], g_l[at]
    bt = n_hi - lo_ext
    right_h, right_l = g_h[bt], g_l[bt]
    above = (gamma_h > left_h) | ((gamma_h == left_h) & (gamma_l > left_l))
    below = (gamma_h < right_h) | ((gamma_h == right_h) & (gamma_l <= right_l))
    keep = above & below
    first_index += int(np.sum(~above))
    return gamma_h[keep], gamma_l[keep], zp[keep], first_index


def isolate_zeros(t_lo, t_hi, threads: int = 1) -> List[ZeroRecord]:
    """All zeros of Z with ordinate in (t_lo, t_hi], refined and indexed.

    Spans of Gram intervals are processed independently (optionally in
    parallel); span boundaries depend only on the requested range, so
    the result is identical for any thread count.
    """
    t_lo = t_lo if isinstance(t_lo, ExtReal) else ExtReal(float(t_lo))
    t_hi = t_hi if isinstance(t_hi, ExtReal) else ExtReal(float(t_hi))
    if not (SCAN_FLOOR <= float(t_lo) < float(t_hi) <= 1.0e7):
        raise ValueError(
            f"isolate_zeros range must satisfy 10 <= t_lo < t_hi <= 1e7, "
            f"got ({float(t_lo)}, {float(t_hi)})")
    th, _ = rs_theta_batch(np.array([t_lo.hi, t_hi.hi]),
                           np.array([t_lo.lo, t_hi.lo]))
    g0_h, _unused = _gram_points(np.array([0.0]))
    bottom = t_lo.hi < g0_h[0]
    n_lo = 0 if bottom else int(math.floor(th[0] / math.pi))
    n_hi = max(n_lo + 1, int(math.ceil(th[1] / math.pi)))
    first = 0 if bottom else (n_lo // _CHUNK) * _CHUNK
    cuts = list(range(first, n_hi, _CHUNK))[1:] + [n_hi]
    spans = []
    prev = n_lo
    for c in cuts:
        spans.append((prev, c, bottom and prev == n_lo))
        prev = c
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda s: _scan_span(*s), spans))
    else:
        results = [_scan_span(*s) for s in spans]

    g_h = np.concatenate([r[0] for r in results])
    g_l = np.concatenate([r[1] for r in results])
    zp = np.concatenate([r[2] for r in results])
    index = np.concatenate([
        np.arange(r[3], r[3] + len(r[0]), dtype=np.int64) for r in results])
    if len(index) and np.any(np.diff(index) != 1):
        raise ArithmeticError("span index anchoring is inconsistent")

    above = (g_h > t_lo.hi) | ((g_h == t_lo.hi) & (g_l > t_lo.lo))
    below = (g_h < t_hi.hi) | ((g_h == t_hi.hi) & (g_l <= t_hi.lo))
    keep = above & below
    hazard = keep & (zp < _ZPRIME_FLOOR)
    if np.any(hazard):
        raise ValueError(
            f"|Z'| below {_ZPRIME_FLOOR} at zero(s) "
            f"{index[hazard].tolist()}; simplicity in doubt, not storing")
    return [ZeroRecord(int(index[i]), ExtReal(g_h[i], g_l[i]),
                       ExtReal(zp[i], 0.0))
            for i in np.nonzero(keep)[0]]


# -- certification -----------------------------------------------------

@dataclass(frozen=True)
class TuringReport:
    certified: bool
    gram_lo: int
    gram_hi: int
    zero_count: int
    max_abs_s: int
    argmax_s: int
    window_integral: Optional[float]
    window_bound: Optional[float]
    first_bad_block: Optional[Tuple[int, int]]
    messages: Tuple[str, ...]


def _gram_index_of(height: ExtReal) -> int:
    th, _ = rs_theta_batch(np.array([height.hi]), np.array([height.lo]))
    k = int(round(th[0] / math.pi))
    res = float(th[0]) - k * math.pi
    if abs(res) > 1e-8:
        raise ValueError(
            f"cache endpoint t={float(height)!r} is not Gram-aligned "
            f"(theta residual {res:.3e})")
    return k


def turing_certify(cache: ZeroCache) -> Tuple[bool, TuringReport]:
    """Validate the stored count at every Gram point; set `certified`.

    The surpluses s_n = stored(g_n) - (n+1) must stay within Littlewood-
    scale bounds, and the trailing-window integral of S(t) must respect
    the Turing bound, which ties down the absolute count rather than
    just its local consistency.
    """
    if len(cache) == 0:
        raise ValueError("cannot certify an empty cache")
    messages: List[str] = []
    anchored_bottom = float(cache.height_lo) < SCAN_FLOOR + 1e-9
    base = int(cache.index[0]) - 1
    if anchored_bottom:
        n0 = 0
        if base != 0:
            messages.append("bottom-anchored cache must start at index 1, "
                            f"got {int(cache.index[0])}")
            report = TuringReport(False, 0, 0, len(cache), 0, 0, None, None,
                                  (-1, 0), tuple(messages))
            cache.certified = False
            return False, report
    else:
        n0 = _gram_index_of(cache.height_lo)
    M = _gram_index_of(cache.height_hi)
    ns = np.arange(n0, M + 1)
    g_h, g_l = _gram_points(ns)
    # hi-word comparison: no zero sits within ~1e-6 of a Gram point at
    # the heights this engine handles
    stored = base + np.searchsorted(cache.gamma_hi, g_h, side="right")
    s = stored - (ns + 1)
    max_abs_s = int(np.max(np.abs(s)))
    argmax_s = int(ns[int(np.argmax(np.abs(s)))])
    ok = True
    first_bad = None
    if max_abs_s >= 3:
        at = int(np.nonzero(np.abs(s) >= 3)[0][0])
        first_bad = (int(ns[at]), int(ns[at]) + 1)
        messages.append(
            f"count surplus s={int(s[at])} at Gram index {int(ns[at])}")
        ok = False

    window_integral = None
    window_bound = None
    top = float(cache.height_hi)
    if ok and top > _TURING_MIN_T:
        W = min(512, max(4, (M - n0) // 4))
        A_h, A_l = g_h[-W - 1], g_l[-W - 1]
        B_h, B_l = g_h[-1], g_l[-1]
        L = (B_h - A_h) + (B_l - A_l)
        in_win = (cache.gamma_hi > A_h) & (cache.gamma_hi <= B_h)
        gam = cache.gamma_hi[in_win] + cache.gamma_lo[in_win]
        c_A = base + int(np.searchsorted(cache.gamma_hi, A_h, side="right"))
        int_stored = c_A * L + float(np.sum((B_h - gam) + B_l))
        nodes, weights = np.polynomial.legendre.leggauss(8)
        seg_l, seg_r = g_h[-W - 1:-1], g_h[-W:]
        mid = 0.5 * (seg_l + seg_r)
        half = 0.5 * (seg_r - seg_l)
        pts = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        th, tl = rs_theta_batch(pts)
        vals = ((th + tl) / math.pi).reshape(W, len(nodes))
        int_theta = float(np.sum(half * (vals @ weights)))
        window_integral = int_stored - int_theta - L
        window_bound = _TURING_A + _TURING_B * math.log(top / (2.0 * math.pi))
        if L < 2.0 * (window_bound + 1.0):
            messages.append("certification window too short to pin the count")
            ok = False
        elif abs(window_integral) > window_bound:
            ok = False
            first_bad = (int(ns[-W - 1]), M)
            messages.append(
                f"S-integral {window_integral:.3f} over the last {W} Gram "
                f"intervals exceeds the bound {window_bound:.3f}")
    elif ok and not anchored_bottom:
        messages.append(
            "range top below the Turing-method floor; a detached span "
            "cannot be certified on its own")
        ok = False

    report = TuringReport(ok, n0, M, len(cache), max_abs_s, argmax_s,
                          window_integral, window_bound, first_bad,
                          tuple(messages))
    cache.certified = ok
    return ok, report


def build_cache(t_hi, threads: int = 1) -> Tuple[ZeroCache, TuringReport]:
    """Scan (0, t_hi], certify, and return the cache with its report.

    The top is rounded up to the next Gram point so the cache carries a
    Gram-aligned endpoint.
    """
    if not (SCAN_FLOOR < float(t_hi) <= 1.0e7):
        raise ValueError("build_cache needs 10 < t_hi <= 1e7")
    th, _ = rs_theta_batch(np.array([float(t_hi)]))
    M = max(1, int(math.ceil(th[0] / math.pi)))
    g_h, g_l = _gram_points(np.array([float(M)]))
    top = ExtReal(g_h[0], g_l[0])
    records = isolate_zeros(SCAN_FLOOR, top, threads=threads)
    cache = ZeroCache.from_records(ExtReal(0.0), top, records,
                                   certified=False)
    ok, report = turing_certify(cache)
    return cache, report
