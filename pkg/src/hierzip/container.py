"""Self-describing archive container.

Layout (all integers little-endian)::

    header     magic "STZ1", u16 version, u8 elem type, u8 levels,
               3 x u64 dims (z, y, x; x fastest), levels x f64 eb schedule
               (coarsest first), f64 value min, f64 value max, u8 quality,
               u8 flags, u8 rounding, f64 requested eb,
               u64 base offset, u64 base length, u64 base checksum,
               u32 directory entry count
    directory  per stream: u8 level, u8 parity bits, u64 offset, u64 length,
               u64 symbol count, u32 outlier count, u64 checksum, table blob
    payloads   base payload, then one region per stream

A stream region is the Huffman bitstream followed by the outlier section:
``outlier count`` u64 flat indices and then the verbatim values in the
field's element type. A stream whose table holds a single symbol omits the
bitstream, since every code is that symbol. Checksums are 8-byte BLAKE2b digests of the region.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

from .core import Parity
from .entropy import HuffmanTable
from .exceptions import CorruptArchiveError, EntropyError

MAGIC = b"STZ1"
VERSION = 1
ELEM_TYPES = {0: np.dtype("<f4"), 1: np.dtype("<f8")}
ELEM_CODES = {np.dtype(np.float32): 0, np.dtype(np.float64): 1}
QUALITY_CODES = {"direct": 0, "linear": 1, "cubic": 2}
QUALITY_NAMES = {v: k for k, v in QUALITY_CODES.items()}

FLAG_REL = 1
FLAG_DEGENERATE = 2
FLAG_ADAPTIVE = 4
ROUND_HALF_AWAY = 0

_HEAD = struct.Struct("<4sHBB3Q")
_TAIL = struct.Struct("<ddBBBdQQQI")
_ENTRY = struct.Struct("<BBQQQIQ")


def checksum(data) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


@dataclass
class ArchiveHeader:
    dims: tuple[int, int, int]
    dtype: np.dtype
    levels: int
    eb_schedule: tuple[float, ...]
    value_min: float
    value_max: float
    quality: str
    rel_mode: bool = False
    degenerate: bool = False
    adaptive: bool = True
    eb_requested: float = 0.0
    base_offset: int = 0
    base_length: int = 0
    base_checksum: int = 0
    version: int = VERSION
    rounding: int = ROUND_HALF_AWAY

    @property
    def eb_user(self) -> float:
        return max(self.eb_schedule)

    @property
    def flags(self) -> int:
        return (
            (FLAG_REL if self.rel_mode else 0)
            | (FLAG_DEGENERATE if self.degenerate else 0)
            | (FLAG_ADAPTIVE if self.adaptive else 0)
        )

    def eb_for(self, level: int) -> float:
        return self.eb_schedule[level - 1]

    def pack(self, n_entries: int) -> bytes:
        head = _HEAD.pack(MAGIC, self.version, ELEM_CODES[np.dtype(self.dtype)], self.levels, *self.dims)
        ebs = struct.pack(f"<{self.levels}d", *self.eb_schedule)
        tail = _TAIL.pack(
            self.value_min,
            self.value_max,
            QUALITY_CODES[self.quality],
            self.flags,
            self.rounding,
            self.eb_requested,
            self.base_offset,
            self.base_length,
            self.base_checksum,
            n_entries,
        )
        return head + ebs + tail

    @classmethod
    def unpack(cls, buf) -> tuple["ArchiveHeader", int, int]:
        """Returns ``(header, directory entry count, offset past header)``."""
        try:
            magic, version, elem, levels, *dims = _HEAD.unpack_from(buf, 0)
        except struct.error:
            raise CorruptArchiveError("archive too short for a header") from None
        if magic != MAGIC:
            raise CorruptArchiveError(f"bad magic {magic!r}")
        if version != VERSION:
            raise CorruptArchiveError(f"unsupported archive version {version}")
        if elem not in ELEM_TYPES or levels not in (2, 3):
            raise CorruptArchiveError("corrupt header fields")
        off = _HEAD.size
        try:
            ebs = struct.unpack_from(f"<{levels}d", buf, off)
            off += 8 * levels
            vmin, vmax, quality, flags, rounding, eb_req, b_off, b_len, b_sum, n = _TAIL.unpack_from(buf, off)
        except struct.error:
            raise CorruptArchiveError("truncated header") from None
        off += _TAIL.size
        if quality not in QUALITY_NAMES or rounding != ROUND_HALF_AWAY:
            raise CorruptArchiveError("unknown quality or rounding mode")
        header = cls(
            dims=tuple(dims),
            dtype=ELEM_TYPES[elem],
            levels=levels,
            eb_schedule=tuple(ebs),
            value_min=vmin,
            value_max=vmax,
            quality=QUALITY_NAMES[quality],
            rel_mode=bool(flags & FLAG_REL),
            degenerate=bool(flags & FLAG_DEGENERATE),
            adaptive=bool(flags & FLAG_ADAPTIVE),
            eb_requested=eb_req,
            base_offset=b_off,
            base_length=b_len,
            base_checksum=b_sum,
            version=version,
            rounding=rounding,
        )
        return header, n, off


@dataclass
class StreamEntry:
    level: int
    parity: Parity
    offset: int
    length: int
    symbol_count: int
    outlier_count: int
    checksum: int
    table: HuffmanTable = field(repr=False)

    def pack(self) -> bytes:
        return (
            _ENTRY.pack(
                self.level,
                self.parity.bits,
                self.offset,
                self.length,
                self.symbol_count,
                self.outlier_count,
                self.checksum,
            )
            + self.table.to_bytes()
        )

    @classmethod
    def unpack(cls, buf, off: int) -> tuple["StreamEntry", int]:
        try:
            level, bits, s_off, s_len, n_sym, n_out, chk = _ENTRY.unpack_from(buf, off)
            table, off = HuffmanTable.from_bytes(buf, off + _ENTRY.size)
            parity = Parity.from_bits(bits)
        except (struct.error, EntropyError, ValueError) as exc:
            raise CorruptArchiveError(f"corrupt directory entry: {exc}") from None
        return cls(level, parity, s_off, s_len, n_sym, n_out, chk, table), off


def pack_stream_region(bitstream: bytes, outlier_index: np.ndarray, outlier_values: np.ndarray, dtype) -> bytes:
    return (
        bitstream
        + np.asarray(outlier_index, dtype="<u8").tobytes()
        + np.asarray(outlier_values, dtype=np.dtype(dtype).newbyteorder("<")).tobytes()
    )


def split_stream_region(region, outlier_count: int, dtype):
    """Split a region into ``(bitstream, outlier index, outlier values)``."""
    dtype = np.dtype(dtype).newbyteorder("<")
    tail = outlier_count * (8 + dtype.itemsize)
    if tail > len(region):
        raise CorruptArchiveError("stream region shorter than its outlier section")
    cut = len(region) - tail
    idx = np.frombuffer(region, dtype="<u8", count=outlier_count, offset=cut).astype(np.int64)
    vals = np.frombuffer(region, dtype=dtype, count=outlier_count, offset=cut + 8 * outlier_count)
    return bytes(region[:cut]), idx, vals


@dataclass
class CompressedArchive:
    """Parsed archive: header, stream directory and the raw bytes."""

    header: ArchiveHeader
    directory: list[StreamEntry]
    buffer: bytes

    @classmethod
    def build(cls, header: ArchiveHeader, base_payload: bytes, streams) -> "CompressedArchive":
        """Lay out ``streams`` -- ``(level, parity, table, n_symbols, n_outliers, region)`` tuples."""
        entries = [
            StreamEntry(lvl, Parity(*par), 0, len(reg), n_sym, n_out, checksum(reg), tab)
            for lvl, par, tab, n_sym, n_out, reg in streams
        ]
        header.base_length = len(base_payload)
        header.base_checksum = checksum(base_payload)
        dir_size = sum(len(e.pack()) for e in entries)
        cursor = len(header.pack(len(entries))) + dir_size
        header.base_offset = cursor
        cursor += len(base_payload)
        for e in entries:
            e.offset = cursor
            cursor += e.length
        parts = [header.pack(len(entries))]
        parts += [e.pack() for e in entries]
        parts.append(base_payload)
        parts += [s[5] for s in streams]
        return cls(header, entries, b"".join(parts))

    @classmethod
    def from_bytes(cls, buf) -> "CompressedArchive":
        buf = bytes(buf)
        header, n, off = ArchiveHeader.unpack(buf)
        directory = []
        for _ in range(n):
            entry, off = StreamEntry.unpack(buf, off)
            directory.append(entry)
        spans = [(header.base_offset, header.base_length)] + [(e.offset, e.length) for e in directory]
        spans.sort()
        prev_end = off
        for start, length in spans:
            if start < prev_end or start + length > len(buf):
                raise CorruptArchiveError("directory offsets overlap or exceed the archive")
            prev_end = start + length
        for e in directory:
            if not 2 <= e.level <= header.levels:
                raise CorruptArchiveError(f"stream level {e.level} out of range")
        return cls(header, directory, buf)

    def to_bytes(self) -> bytes:
        return self.buffer

    @property
    def nbytes(self) -> int:
        return len(self.buffer)

    def base_payload(self) -> bytes:
        h = self.header
        data = self.buffer[h.base_offset : h.base_offset + h.base_length]
        if checksum(data) != h.base_checksum:
            raise CorruptArchiveError("base payload checksum mismatch")
        return data

    def region(self, entry: StreamEntry) -> bytes:
        data = self.buffer[entry.offset : entry.offset + entry.length]
        if checksum(data) != entry.checksum:
            raise CorruptArchiveError(
                f"checksum mismatch in level {entry.level} stream {tuple(entry.parity)}"
            )
        return data

    def entry(self, level: int, parity) -> StreamEntry:
        parity = Parity(*parity)
        for e in self.directory:
            if e.level == level and e.parity == parity:
                return e
        raise CorruptArchiveError(f"archive has no level {level} stream {tuple(parity)}")

    def streams_at(self, level: int) -> list[StreamEntry]:
        return [e for e in self.directory if e.level == level]
