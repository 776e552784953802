"""Zero isolation, refinement accuracy, and Turing certification.

Ordinate oracles are the published low zeros (frozen below to 20
digits); counts come from the classical N(T) tables.  One test
cross-checks a sample of ordinates against a live 40-digit root solve.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import zml.zeros as zeros_mod
from zml.cache import ZeroCache, cache_io
from zml.ddmath import ExtReal
from zml.special import hardy_z_batch, rs_theta_batch
from zml.zeros import (CertificationError, build_cache, gram_point,
                       isolate_zeros, turing_certify)

# first ten ordinates, root-solved at 40 digits and frozen
GAMMA_10 = [
    14.134725141734693790,
    21.022039638771554993,
    25.010857580145688763,
    30.424876125859513210,
    32.935061587739189691,
    37.586178158825671257,
    40.918719012147495187,
    43.327073280914999519,
    48.005150881167159727,
    49.773832477672302181,
]
ZPRIME_ABS_GAMMA_1 = 0.7931604333565061160138976

# classical zero counts
N_OF = {100.0: 29, 500.0: 269, 1000.0: 649}


def test_gram_point_golden():
    assert abs(float(gram_point(0)) - 17.8455995) < 5e-7


def test_gram_point_defining_equation_sampled():
    for n in (0, 1, 17, 360, 5000, 100000):
        g = gram_point(n)
        th, tl = rs_theta_batch(np.array([g.hi]), np.array([g.lo]))
        res = (th[0] - n * math.pi) + tl[0]
        assert abs(res) <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=99999))
def test_gram_points_increase(n):
    assert gram_point(n + 1) > gram_point(n)


def test_gram_point_domain():
    with pytest.raises(ValueError):
        gram_point(-1)


def test_isolate_first_ten():
    recs = isolate_zeros(10, 50)
    assert [r.index for r in recs] == list(range(1, 11))
    for r, gold in zip(recs, GAMMA_10):
        assert abs(float(r.gamma) - gold) < 1e-9
    assert abs(float(recs[0].zprime_abs) - ZPRIME_ABS_GAMMA_1) < 1e-6


def test_isolate_empty_range():
    assert isolate_zeros(10, 14) == []


def test_isolate_domain_errors():
    with pytest.raises(ValueError):
        isolate_zeros(5, 50)
    with pytest.raises(ValueError):
        isolate_zeros(50, 50)
    with pytest.raises(ValueError):
        isolate_zeros(100, 2e7)


def test_lehmer_pair_resolved():
    recs = isolate_zeros(7004.9, 7005.2)
    assert len(recs) == 2
    a, b = recs
    assert (a.index, b.index) == (6709, 6710)
    gap = float(b.gamma) - float(a.gamma)
    assert abs(gap - 0.0377) < 1e-4
    assert float(a.zprime_abs) > 1e-4
    assert float(b.zprime_abs) > 1e-4


def test_midrange_slice_is_indexed_absolutely():
    recs = isolate_zeros(1000.0, 1010.0)
    # N(1000) = 649, so the first zero past 1000 is number 650
    assert recs[0].index == 650
    assert float(recs[0].gamma) > 1000.0


def test_thread_count_does_not_change_results():
    # the range crosses a span cut, so multiple chunks are exercised
    one = isolate_zeros(4000, 5200, threads=1)
    four = isolate_zeros(4000, 5200, threads=4)
    assert len(one) == len(four)
    for a, b in zip(one, four):
        assert a.index == b.index
        assert a.gamma.hi == b.gamma.hi and a.gamma.lo == b.gamma.lo
        assert a.zprime_abs.hi == b.zprime_abs.hi


def test_zprime_floor_flagging(monkeypatch):
    monkeypatch.setattr(zeros_mod, "_ZPRIME_FLOOR", 10.0)
    with pytest.raises(ValueError, match="simplicity"):
        isolate_zeros(10, 30)


def test_certified_counts(cache_1k):
    cache, report = cache_1k
    for T, n in N_OF.items():
        assert int(np.searchsorted(cache.gamma_hi, T, side="right")) == n
    assert report.max_abs_s <= 2
    assert report.window_bound is not None
    assert abs(report.window_integral) <= report.window_bound


def test_gram_law_holds_at_good_points(cache_1k):
    cache, report = cache_1k
    ns = np.arange(0, report.gram_hi + 1)
    g_h, g_l = zeros_mod._gram_points(ns)
    z = hardy_z_batch(g_h, g_l)
    good = zeros_mod._good_mask(ns, z)
    stored = np.searchsorted(cache.gamma_hi, g_h, side="right")
    assert np.all(stored[good] == ns[good] + 1)


def test_interlacing(cache_1k):
    cache, _ = cache_1k
    g = cache.gamma_hi
    lo, hi = g[:-1], g[1:]
    frac = np.linspace(0.0, 1.0, 7)[1:-1]
    pts = lo[:, None] + (hi - lo)[:, None] * frac[None, :]
    z = hardy_z_batch(pts.ravel()).reshape(pts.shape)
    signs = np.sign(z)
    assert np.all(signs == signs[:, :1])
    # consecutive gaps alternate sign
    assert np.all(signs[1:, 0] == -signs[:-1, 0])


def test_round_trip_through_file(tmp_path, cache_1k):
    cache, _ = cache_1k
    path = tmp_path / "zeros_1k.zc"
    cache_io(path, "write", cache)
    back = cache_io(path, "read")
    assert back == cache


def test_append_piece_and_recertify(tmp_path, cache_1k):
    cache, report = cache_1k
    top_n = report.gram_hi + 120
    top = gram_point(top_n)
    piece_records = isolate_zeros(cache.height_hi, top)
    piece = ZeroCache.from_records(cache.height_hi, top, piece_records)
    ok, piece_report = turing_certify(piece)
    assert ok, piece_report.messages
    path = tmp_path / "zeros_grow.zc"
    cache_io(path, "write", cache)
    merged = cache_io(path, "append", piece)
    assert len(merged) == len(cache) + len(piece)
    ok, merged_report = turing_certify(merged)
    assert ok
    assert merged_report.gram_hi == top_n
    # appending a stack of spans agrees with one continuous scan to the
    # refinement tolerance (span partitions chunk the evaluator
    # differently, so last-bit identity is only promised per partition)
    direct = isolate_zeros(10.0, top)
    assert len(direct) == len(merged)
    d_hi = np.array([r.gamma.hi for r in direct])
    d_lo = np.array([r.gamma.lo for r in direct])
    diff = (merged.gamma_hi - d_hi) + (merged.gamma_lo - d_lo)
    assert np.max(np.abs(diff)) < 1e-12


def test_certify_catches_missing_zeros(cache_1k):
    cache, _ = cache_1k
    n = len(cache) - 10
    clipped = ZeroCache(cache.height_lo, cache.height_hi,
                        cache.index[:n], cache.gamma_hi[:n],
                        cache.gamma_lo[:n], cache.zprime_hi[:n],
                        cache.zprime_lo[:n])
    ok, report = turing_certify(clipped)
    assert not ok
    assert report.first_bad_block is not None
    assert not clipped.certified


def test_certify_catches_misanchored_indices(cache_1k):
    cache, _ = cache_1k
    shifted = ZeroCache(cache.height_lo, cache.height_hi,
                        cache.index + np.uint64(1), cache.gamma_hi,
                        cache.gamma_lo, cache.zprime_hi, cache.zprime_lo)
    ok, report = turing_certify(shifted)
    assert not ok
    assert any("index 1" in m for m in report.messages)


def test_certify_rejects_unaligned_endpoint(cache_1k):
    cache, _ = cache_1k
    n = int(np.searchsorted(cache.gamma_hi, 900.0, side="right"))
    trimmed = ZeroCache(cache.height_lo, ExtReal(900.0),
                        cache.index[:n], cache.gamma_hi[:n],
                        cache.gamma_lo[:n], cache.zprime_hi[:n],
                        cache.zprime_lo[:n])
    with pytest.raises(ValueError, match="Gram-aligned"):
        turing_certify(trimmed)


def test_detached_low_span_cannot_certify():
    lo, hi = gram_point(20), gram_point(60)
    piece_records = isolate_zeros(lo, hi)
    piece = ZeroCache.from_records(lo, hi, piece_records)
    ok, report = turing_certify(piece)
    assert not ok
    assert any("detached" in m for m in report.messages)


def test_sub_turing_bottom_cache_certifies():
    cache, report = build_cache(200.0)
    assert report.certified
    assert report.window_integral is None


def test_empty_cache_cannot_certify(cache_1k):
    cache, _ = cache_1k
    empty = ZeroCache(ExtReal(0.0), ExtReal(20.0),
                      np.array([], dtype=np.uint64), np.array([]),
                      np.array([]), np.array([]), np.array([]))
    with pytest.raises(ValueError, match="empty"):
        turing_certify(empty)


def test_ordinates_against_live_solver(cache_1k):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 40
    cache, _ = cache_1k
    for n in (1, 10, 29, 100, 649):
        gold = float(mp.im(mp.zetazero(n)))
        ours = cache.gamma_hi[n - 1] + cache.gamma_lo[n - 1]
        assert abs(ours - gold) < 1e-10
