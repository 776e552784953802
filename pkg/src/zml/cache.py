"""Persistent store for refined zero ordinates and |Z'| values.

A cache holds the zeros whose ordinates lie in (height_lo, height_hi],
each as a double-word pair, together with 1-based indices and |Z'(gamma)|.
The binary layout is

    header   16 bytes: 8-byte magic, u32 version, u32 flags (bit 0 =
             certified), all little-endian
    body     40-byte metadata block (height_lo hi/lo, height_hi hi/lo,
             record count) followed by 40-byte records
             (index u64, gamma hi/lo, zprime hi/lo)
    pages    the body is cut into 64 KiB pages, each page (including the
             final partial one) followed by its CRC-32

Integrity failures, format-version mismatches, and bad appends raise
distinct exception types so callers can react differently to each.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

import numpy as np

from .ddmath import ExtReal

_MAGIC = b"ZMLZEROS"
_VERSION = 1
_FLAG_CERTIFIED = 0x1
_PAGE = 64 * 1024

_HEADER = struct.Struct("<8sII")
_META = struct.Struct("<ddddQ")

_REC_DTYPE = np.dtype([
    ("index", "<u8"),
    ("gamma_hi", "<f8"),
    ("gamma_lo", "<f8"),
    ("zprime_hi", "<f8"),
    ("zprime_lo", "<f8"),
])


class CacheError(RuntimeError):
    """Base class for zero-cache I/O failures."""


class ChecksumError(CacheError):
    """A page CRC did not match, or the body is truncated."""


class VersionError(CacheError):
    """The file is not a zero cache or has an unsupported version."""


class OverlapError(CacheError):
    """An append whose height range overlaps the existing cache."""


@dataclass(frozen=True)
class ZeroRecord:
    """One zero of Z: 1-based index, ordinate, and |Z'| at the ordinate."""

    index: int
    gamma: ExtReal
    zprime_abs: ExtReal

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"zero index must be >= 1, got {self.index}")
        if not self.gamma > 0:
            raise ValueError("gamma must be positive")
        if not self.zprime_abs > 0:
            raise ValueError("zprime_abs must be positive")


def _pairs_increasing(hi: np.ndarray, lo: np.ndarray) -> bool:
    # normalised double-word pairs order lexicographically
    if len(hi) < 2:
        return True
    dh = np.diff(hi)
    if np.any(dh < 0.0):
        return False
    ties = dh == 0.0
    return not np.any(ties & (np.diff(lo) <= 0.0))


class ZeroCache:
    """Array-backed, immutable-after-construction collection of zeros.

    The five parallel arrays are the primary representation; `records`
    materialises ZeroRecord objects on first use.  Shareable across
    threads once built.
    """

    __slots__ = ("height_lo", "height_hi", "index", "gamma_hi", "gamma_lo",
                 "zprime_hi", "zprime_lo", "certified", "_records")

    def __init__(self, height_lo: ExtReal, height_hi: ExtReal,
                 index: np.ndarray, gamma_hi: np.ndarray,
                 gamma_lo: np.ndarray, zprime_hi: np.ndarray,
                 zprime_lo: np.ndarray, certified: bool = False):
        object.__setattr__(self, "height_lo", height_lo)
        object.__setattr__(self, "height_hi", height_hi)
        object.__setattr__(self, "index",
                           np.ascontiguousarray(index, dtype=np.uint64))
        object.__setattr__(self, "gamma_hi",
                           np.ascontiguousarray(gamma_hi, dtype=np.float64))
        object.__setattr__(self, "gamma_lo",
                           np.ascontiguousarray(gamma_lo, dtype=np.float64))
        object.__setattr__(self, "zprime_hi",
                           np.ascontiguousarray(zprime_hi, dtype=np.float64))
        object.__setattr__(self, "zprime_lo",
                           np.ascontiguousarray(zprime_lo, dtype=np.float64))
        object.__setattr__(self, "certified", bool(certified))
        object.__setattr__(self, "_records", None)
        self._check()

    def __setattr__(self, name, value):
        if name == "certified":
            object.__setattr__(self, name, bool(value))
            return
        raise AttributeError("ZeroCache fields are immutable")

    def _check(self) -> None:
        n = len(self.index)
        for arr in (self.gamma_hi, self.gamma_lo,
                    self.zprime_hi, self.zprime_lo):
            if len(arr) != n:
                raise ValueError("cache arrays must share one length")
        if not self.height_lo < self.height_hi:
            raise ValueError("height_lo must be below height_hi")
        if n == 0:
            return
        if np.any(np.diff(self.index.astype(np.int64)) != 1):
            raise ValueError("zero indices must be consecutive")
        if int(self.index[0]) < 1:
            raise ValueError("zero indices are 1-based")
        if not _pairs_increasing(self.gamma_hi, self.gamma_lo):
            raise ValueError("gamma must be strictly increasing")
        if not np.all(self.zprime_hi > 0.0):
            raise ValueError("zprime_abs must be positive")
        lo, hi = self.height_lo, self.height_hi
        if not ExtReal(self.gamma_hi[0], self.gamma_lo[0]) > lo:
            raise ValueError("first gamma at or below height_lo")
        if not ExtReal(self.gamma_hi[-1], self.gamma_lo[-1]) <= hi:
            raise ValueError("last gamma above height_hi")

    def __len__(self) -> int:
        return len(self.index)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ZeroCache):
            return NotImplemented
        return (self.height_lo == other.height_lo
                and self.height_hi == other.height_hi
                and self.certified == other.certified
                and np.array_equal(self.index, other.index)
                and np.array_equal(self.gamma_hi, other.gamma_hi)
                and np.array_equal(self.gamma_lo, other.gamma_lo)
                and np.array_equal(self.zprime_hi, other.zprime_hi)
                and np.array_equal(self.zprime_lo, other.zprime_lo))

    @property
    def records(self) -> Tuple[ZeroRecord, ...]:
        if self._records is None:
            recs = tuple(
                ZeroRecord(int(self.index[i]),
                           ExtReal(self.gamma_hi[i], self.gamma_lo[i]),
                           ExtReal(self.zprime_hi[i], self.zprime_lo[i]))
                for i in range(len(self.index)))
            object.__setattr__(self, "_records", recs)
        return self._records

    @classmethod
    def from_records(cls, height_lo: ExtReal, height_hi: ExtReal,
                     records: Iterable[ZeroRecord],
                     certified: bool = False) -> "ZeroCache":
        recs = list(records)
        n = len(recs)
        index = np.empty(n, dtype=np.uint64)
        g_hi = np.empty(n)
        g_lo = np.empty(n)
        z_hi = np.empty(n)
        z_lo = np.empty(n)
        for i, r in enumerate(recs):
            index[i] = r.index
            g_hi[i], g_lo[i] = r.gamma.hi, r.gamma.lo
            z_hi[i], z_lo[i] = r.zprime_abs.hi, r.zprime_abs.lo
        return cls(height_lo, height_hi, index, g_hi, g_lo, z_hi, z_lo,
                   certified)

    # -- serialisation -------------------------------------------------

    def _body(self) -> bytes:
        meta = _META.pack(self.height_lo.hi, self.height_lo.lo,
                          self.height_hi.hi, self.height_hi.lo,
                          len(self.index))
        recs = np.empty(len(self.index), dtype=_REC_DTYPE)
        recs["index"] = self.index
        recs["gamma_hi"] = self.gamma_hi
        recs["gamma_lo"] = self.gamma_lo
        recs["zprime_hi"] = self.zprime_hi
        recs["zprime_lo"] = self.zprime_lo
        return meta + recs.tobytes()

    def content_crc(self) -> int:
        """CRC-32 of the serialised body; stable fingerprint for reports."""
        return zlib.crc32(self._body()) & 0xFFFFFFFF

    def to_csv(self, path) -> None:
        """Write `index,gamma,zprime_abs` rows at 25 significant digits."""
        with open(path, "w") as fh:
            fh.write("index,gamma,zprime_abs\n")
            for i in range(len(self.index)):
                g = ExtReal(self.gamma_hi[i], self.gamma_lo[i])
                z = ExtReal(self.zprime_hi[i], self.zprime_lo[i])
                fh.write(f"{int(self.index[i])},{g.to_decimal(25)},"
                         f"{z.to_decimal(25)}\n")


def _write_file(path, cache: ZeroCache) -> None:
    flags = _FLAG_CERTIFIED if cache.certified else 0
    body = cache._body()
    parts = [_HEADER.pack(_MAGIC, _VERSION, flags)]
    for off in range(0, len(body), _PAGE):
        page = body[off:off + _PAGE]
        parts.append(page)
        parts.append(struct.pack("<I", zlib.crc32(page) & 0xFFFFFFFF))
    with open(path, "wb") as fh:
        fh.write(b"".join(parts))


def _read_file(path) -> ZeroCache:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise VersionError(f"{path}: too short to be a zero cache")
    magic, version, flags = _HEADER.unpack_from(blob, 0)
    if magic != _MAGIC:
        raise VersionError(f"{path}: bad magic {magic!r}")
    if version != _VERSION:
        raise VersionError(
            f"{path}: format version {version}, expected {_VERSION}")
    payload = blob[_HEADER.size:]
    # each page contributes page-size + 4 CRC bytes; the page count is
    # forced by the total length
    n_pages = -(-len(payload) // (_PAGE + 4))
    body_len = len(payload) - 4 * n_pages
    if body_len < _META.size:
        raise ChecksumError(f"{path}: body shorter than metadata block")
    pages = []
    off = 0
    remaining = body_len
    for _ in range(n_pages):
        step = min(_PAGE, remaining)
        page = payload[off:off + step]
        (crc,) = struct.unpack_from("<I", payload, off + step)
        if zlib.crc32(page) & 0xFFFFFFFF != crc:
            raise ChecksumError(f"{path}: page CRC mismatch at offset {off}")
        pages.append(page)
        off += step + 4
        remaining -= step
    body = b"".join(pages)
    h_lo_hi, h_lo_lo, h_hi_hi, h_hi_lo, count = _META.unpack_from(body, 0)
    if len(body) != _META.size + count * _REC_DTYPE.itemsize:
        raise ChecksumError(f"{path}: record area does not match count")
    recs = np.frombuffer(body, dtype=_REC_DTYPE, count=count,
                         offset=_META.size)
    return ZeroCache(ExtReal(h_lo_hi, h_lo_lo), ExtReal(h_hi_hi, h_hi_lo),
                     recs["index"].copy(), recs["gamma_hi"].copy(),
                     recs["gamma_lo"].copy(), recs["zprime_hi"].copy(),
                     recs["zprime_lo"].copy(),
                     certified=bool(flags & _FLAG_CERTIFIED))


def _append(path, cache: ZeroCache) -> ZeroCache:
    base = _read_file(path)
    if not base.certified:
        raise ValueError("append target is not certified")
    if cache.height_lo < base.height_hi:
        raise OverlapError(
            f"append range starts at {float(cache.height_lo)!r}, below the "
            f"existing top {float(base.height_hi)!r}")
    if cache.height_lo > base.height_hi:
        raise ValueError("append range leaves a gap above the existing top")
    if len(base) and len(cache) \
            and int(cache.index[0]) != int(base.index[-1]) + 1:
        raise ValueError(
            f"append indices start at {int(cache.index[0])}, expected "
            f"{int(base.index[-1]) + 1}")
    merged = ZeroCache(
        base.height_lo, cache.height_hi,
        np.concatenate([base.index, cache.index]),
        np.concatenate([base.gamma_hi, cache.gamma_hi]),
        np.concatenate([base.gamma_lo, cache.gamma_lo]),
        np.concatenate([base.zprime_hi, cache.zprime_hi]),
        np.concatenate([base.zprime_lo, cache.zprime_lo]),
        certified=True)
    _write_file(path, merged)
    return merged


def cache_io(path, mode: str, cache: ZeroCache | None = None) -> ZeroCache:
    """Read, write, or append a zero cache file.

    "read" ignores `cache`; "write" and "append" require a certified one.
    Append demands contiguity: the new range must start exactly at the
    stored range's top with consecutive indices.
    """
    if mode == "read":
        return _read_file(path)
    if mode not in ("write", "append"):
        raise ValueError(f"unknown cache_io mode {mode!r}")
    if cache is None:
        raise ValueError(f"mode {mode!r} needs a cache")
    if not cache.certified:
        raise ValueError(f"mode {mode!r} requires a certified cache")
    if mode == "write":
        _write_file(path, cache)
        return cache
    return _append(path, cache)
