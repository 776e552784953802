"""Zero-cache container and binary round-trip behaviour."""

import numpy as np
import pytest

from zml.cache import (CacheError, ChecksumError, OverlapError, VersionError,
                       ZeroCache, ZeroRecord, cache_io)
from zml.ddmath import ExtReal


def synthetic(n, first_index=1, lo=0.0, start=14.0, certified=True, seed=7):
    """A structurally valid cache with made-up ordinates."""
    rng = np.random.default_rng(seed)
    gaps = rng.uniform(0.2, 1.5, size=n)
    g_hi = start + np.cumsum(gaps)
    g_lo = rng.uniform(-1e-17, 1e-17, size=n) * g_hi
    zp_hi = rng.uniform(0.1, 8.0, size=n)
    zp_lo = np.zeros(n)
    index = np.arange(first_index, first_index + n, dtype=np.uint64)
    return ZeroCache(ExtReal(lo), ExtReal(g_hi[-1] + 1.0),
                     index, g_hi, g_lo, zp_hi, zp_lo, certified=certified)


def test_round_trip_field_exact(tmp_path):
    cache = synthetic(100)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", cache)
    back = cache_io(path, "read")
    assert back == cache
    assert back.certified
    assert np.array_equal(back.gamma_lo, cache.gamma_lo)


def test_round_trip_multi_page(tmp_path):
    # 1800 records * 40 bytes spills into a second 64 KiB page
    cache = synthetic(1800)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", cache)
    assert path.stat().st_size > 64 * 1024
    assert cache_io(path, "read") == cache


@pytest.mark.parametrize("offset_from_end", [1, 30000])
def test_corrupted_byte_raises_checksum_error(tmp_path, offset_from_end):
    cache = synthetic(1800)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", cache)
    blob = bytearray(path.read_bytes())
    blob[len(blob) - offset_from_end] ^= 0x40
    path.write_bytes(bytes(blob))
    with pytest.raises(ChecksumError):
        cache_io(path, "read")


def test_truncated_file_raises_checksum_error(tmp_path):
    cache = synthetic(50)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", cache)
    blob = path.read_bytes()
    path.write_bytes(blob[:len(blob) - 13])
    with pytest.raises(ChecksumError):
        cache_io(path, "read")


def test_version_and_magic_mismatch(tmp_path):
    cache = synthetic(10)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", cache)
    blob = bytearray(path.read_bytes())
    blob[8] = 99  # version field
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionError):
        cache_io(path, "read")
    blob[0:8] = b"NOTZEROS"
    path.write_bytes(bytes(blob))
    with pytest.raises(VersionError):
        cache_io(path, "read")
    stub = tmp_path / "stub.zc"
    stub.write_bytes(b"short")
    with pytest.raises(VersionError):
        cache_io(stub, "read")
    # errors above are distinct classes under one family
    assert issubclass(ChecksumError, CacheError)
    assert issubclass(VersionError, CacheError)
    assert issubclass(OverlapError, CacheError)
    assert not issubclass(ChecksumError, VersionError)


def test_write_requires_certified(tmp_path):
    cache = synthetic(10, certified=False)
    with pytest.raises(ValueError, match="certified"):
        cache_io(tmp_path / "zeros.zc", "write", cache)


def test_append_contiguous(tmp_path):
    base = synthetic(60)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", base)
    ext = ZeroCache(base.height_hi, ExtReal(float(base.height_hi) + 50.0),
                    np.arange(61, 101, dtype=np.uint64),
                    float(base.height_hi) + np.linspace(0.5, 49.5, 40),
                    np.zeros(40), np.full(40, 2.0), np.zeros(40),
                    certified=True)
    merged = cache_io(path, "append", ext)
    assert len(merged) == 100
    assert merged.height_lo == base.height_lo
    assert merged.height_hi == ext.height_hi
    back = cache_io(path, "read")
    assert back == merged
    assert np.all(np.diff(back.index.astype(np.int64)) == 1)


def test_append_overlap_rejected(tmp_path):
    base = synthetic(60)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", base)
    overlapping = ZeroCache(
        ExtReal(float(base.height_hi) - 5.0),
        ExtReal(float(base.height_hi) + 50.0),
        np.arange(61, 64, dtype=np.uint64),
        float(base.height_hi) + np.array([1.0, 2.0, 3.0]),
        np.zeros(3), np.ones(3), np.zeros(3), certified=True)
    with pytest.raises(OverlapError):
        cache_io(path, "append", overlapping)


def test_append_gap_rejected(tmp_path):
    base = synthetic(60)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", base)
    gapped = ZeroCache(
        ExtReal(float(base.height_hi) + 5.0),
        ExtReal(float(base.height_hi) + 50.0),
        np.arange(61, 64, dtype=np.uint64),
        float(base.height_hi) + np.array([6.0, 7.0, 8.0]),
        np.zeros(3), np.ones(3), np.zeros(3), certified=True)
    with pytest.raises(ValueError, match="gap"):
        cache_io(path, "append", gapped)


def test_append_index_discontinuity_rejected(tmp_path):
    base = synthetic(60)
    path = tmp_path / "zeros.zc"
    cache_io(path, "write", base)
    wrong = ZeroCache(base.height_hi, ExtReal(float(base.height_hi) + 50.0),
                      np.arange(70, 73, dtype=np.uint64),
                      float(base.height_hi) + np.array([1.0, 2.0, 3.0]),
                      np.zeros(3), np.ones(3), np.zeros(3), certified=True)
    with pytest.raises(ValueError, match="indices"):
        cache_io(path, "append", wrong)


def test_unknown_mode(tmp_path):
    with pytest.raises(ValueError, match="mode"):
        cache_io(tmp_path / "x.zc", "frobnicate", synthetic(1))


def test_construction_invariants():
    with pytest.raises(ValueError, match="increasing"):
        ZeroCache(ExtReal(0.0), ExtReal(100.0),
                  np.array([1, 2], dtype=np.uint64),
                  np.array([20.0, 20.0]), np.zeros(2),
                  np.ones(2), np.zeros(2))
    with pytest.raises(ValueError, match="consecutive"):
        ZeroCache(ExtReal(0.0), ExtReal(100.0),
                  np.array([1, 3], dtype=np.uint64),
                  np.array([20.0, 30.0]), np.zeros(2),
                  np.ones(2), np.zeros(2))
    with pytest.raises(ValueError, match="positive"):
        ZeroCache(ExtReal(0.0), ExtReal(100.0),
                  np.array([1, 2], dtype=np.uint64),
                  np.array([20.0, 30.0]), np.zeros(2),
                  np.array([1.0, 0.0]), np.zeros(2))
    with pytest.raises(ValueError, match="height"):
        ZeroCache(ExtReal(100.0), ExtReal(50.0),
                  np.array([1], dtype=np.uint64), np.array([60.0]),
                  np.zeros(1), np.ones(1), np.zeros(1))


def test_record_validation():
    with pytest.raises(ValueError):
        ZeroRecord(0, ExtReal(14.1), ExtReal(1.0))
    with pytest.raises(ValueError):
        ZeroRecord(1, ExtReal(-14.1), ExtReal(1.0))
    with pytest.raises(ValueError):
        ZeroRecord(1, ExtReal(14.1), ExtReal(0.0))


def test_records_round_trip():
    cache = synthetic(25)
    rebuilt = ZeroCache.from_records(cache.height_lo, cache.height_hi,
                                     cache.records, certified=True)
    assert rebuilt == cache
    assert rebuilt.records[3].index == 4


def test_content_crc_tracks_content():
    a = synthetic(40)
    b = synthetic(40)
    assert a.content_crc() == b.content_crc()
    c = synthetic(40, seed=8)
    assert a.content_crc() != c.content_crc()


def test_csv_export(tmp_path):
    g = ExtReal.from_str("14.13472514173469379045725938")
    z = ExtReal.from_str("0.7931604333565061160138976")
    cache = ZeroCache.from_records(
        ExtReal(0.0), ExtReal(20.0),
        [ZeroRecord(1, g, z)], certified=True)
    path = tmp_path / "zeros.csv"
    cache.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "index,gamma,zprime_abs"
    idx, gs, zs = lines[1].split(",")
    assert idx == "1"
    # 25 significant digits survive the trip
    assert abs(float(gs) - 14.134725141734693790) < 1e-14
    assert gs.startswith("14.13472514173469379")
    digits = [c for c in gs if c.isdigit()]
    assert len(digits) == 25
    assert zs.startswith("0.79316043335650611")
