"""Canonical Huffman coding of quantization code streams.

Every sub-block gets its own table and bitstream, so a stream can be decoded
without touching any other stream's bytes. Codewords are written MSB first
and the last byte is zero padded; the symbol count travels out of band.
"""

from __future__ import annotations

import heapq
import struct
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .exceptions import EntropyError

MAX_CODE_LENGTH = 63


@dataclass(frozen=True, eq=False)
class HuffmanTable:
    """Canonical code: ``symbols`` sorted by (length, symbol), with matching ``lengths``."""

    symbols: np.ndarray
    lengths: np.ndarray
    codes: np.ndarray = field(repr=False)

    def __eq__(self, other):
        if not isinstance(other, HuffmanTable):
            return NotImplemented
        return np.array_equal(self.symbols, other.symbols) and np.array_equal(self.lengths, other.lengths)

    __hash__ = None

    @classmethod
    def from_lengths(cls, symbols, lengths) -> "HuffmanTable":
        symbols = np.asarray(symbols, dtype=np.int64)
        lengths = np.asarray(lengths, dtype=np.int64)
        if symbols.size == 0:
            raise EntropyError("empty Huffman table")
        if symbols.shape != lengths.shape:
            raise EntropyError("symbols and lengths differ in size")
        if lengths.min() < 1 or lengths.max() > MAX_CODE_LENGTH:
            raise EntropyError(f"code lengths must lie in 1..{MAX_CODE_LENGTH}")
        if np.unique(symbols).size != symbols.size:
            raise EntropyError("duplicate symbols in Huffman table")
        kraft = sum(2.0 ** -int(n) for n in lengths)
        if kraft > 1.0 + 1e-12:
            raise EntropyError("code lengths violate the Kraft inequality")
        order = np.lexsort((symbols, lengths))
        symbols, lengths = symbols[order], lengths[order]
        codes = np.empty(symbols.size, dtype=np.int64)
        code, prev = 0, int(lengths[0])
        for i, n in enumerate(lengths.tolist()):
            code <<= n - prev
            codes[i] = code
            code += 1
            prev = n
        return cls(symbols, lengths, codes)

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.symbols.tolist(), self.lengths.tolist()))

    def to_bytes(self) -> bytes:
        if self.symbols.min() < -32768 or self.symbols.max() > 32767:
            raise EntropyError("serialized tables hold int16 symbols only")
        head = struct.pack("<I", self.symbols.size)
        return head + self.symbols.astype("<i2").tobytes() + self.lengths.astype(np.uint8).tobytes()

    @classmethod
    def from_bytes(cls, buf, offset: int = 0) -> tuple["HuffmanTable", int]:
        """Parse a table at ``offset``; returns the table and the offset past it."""
        try:
            (n,) = struct.unpack_from("<I", buf, offset)
            offset += 4
            symbols = np.frombuffer(buf, dtype="<i2", count=n, offset=offset)
            offset += 2 * n
            lengths = np.frombuffer(buf, dtype=np.uint8, count=n, offset=offset)
            offset += n
        except (struct.error, ValueError) as exc:
            raise EntropyError(f"truncated Huffman table: {exc}") from None
        return cls.from_lengths(symbols, lengths), offset

    def _decode_arrays(self):
        maxlen = int(self.lengths.max())
        counts = np.bincount(self.lengths, minlength=maxlen + 1).astype(np.int64)
        firsts = np.zeros(maxlen + 1, dtype=np.int64)
        offsets = np.zeros(maxlen + 1, dtype=np.int64)
        code = 0
        seen = 0
        for n in range(1, maxlen + 1):
            code <<= 1
            firsts[n] = code
            offsets[n] = seen
            code += counts[n]
            seen += counts[n]
        return counts, firsts, offsets


def build_table(histogram) -> HuffmanTable:
    """Optimal canonical code lengths for a ``{symbol: count}`` histogram."""
    items = sorted((int(s), int(c)) for s, c in dict(histogram).items() if c > 0)
    if not items:
        raise EntropyError("cannot build a Huffman table from an empty histogram")
    if len(items) == 1:
        return HuffmanTable.from_lengths([items[0][0]], [1])
    n = len(items)
    # heap entries: (count, node id); internal nodes get ids n, n+1, ...
    heap = [(c, i) for i, (_, c) in enumerate(items)]
    heapq.heapify(heap)
    parent = [0] * (2 * n - 1)
    nxt = n
    while len(heap) > 1:
        c1, a = heapq.heappop(heap)
        c2, b = heapq.heappop(heap)
        parent[a] = parent[b] = nxt
        heapq.heappush(heap, (c1 + c2, nxt))
        nxt += 1
    node_depth = [0] * (2 * n - 1)
    for node in range(2 * n - 3, -1, -1):
        node_depth[node] = node_depth[parent[node]] + 1
    depth = node_depth[:n]
    if max(depth) > MAX_CODE_LENGTH:
        raise EntropyError("Huffman code too deep for 64-bit codewords")
    return HuffmanTable.from_lengths([s for s, _ in items], depth)


def histogram(codes) -> dict[int, int]:
    values, counts = np.unique(np.asarray(codes).reshape(-1), return_counts=True)
    return dict(zip(values.tolist(), counts.tolist()))


def table_for(codes) -> HuffmanTable:
    return build_table(histogram(codes))


@njit(nogil=True, cache=True)
def _encode_kernel(idx, codes, lengths, out):
    acc = 0
    nacc = 0
    pos = 0
    for i in range(idx.size):
        c = codes[idx[i]]
        n = lengths[idx[i]]
        # flush whole bytes before the accumulator could overflow
        while n > 0:
            take = n if n <= 32 else 32
            part = (c >> (n - take)) & ((1 << take) - 1)
            acc = (acc << take) | part
            nacc += take
            n -= take
            while nacc >= 8:
                nacc -= 8
                out[pos] = (acc >> nacc) & 0xFF
                pos += 1
            acc &= (1 << nacc) - 1
    if nacc > 0:
        out[pos] = (acc << (8 - nacc)) & 0xFF
        pos += 1
    return pos


@njit(nogil=True, cache=True)
def _decode_kernel(data, n, counts, firsts, offsets, symbols, out):
    nbits = data.size * 8
    maxlen = counts.size - 1
    pos = 0
    for i in range(n):
        code = 0
        length = 0
        while True:
            if pos >= nbits:
                return -1
            code = (code << 1) | ((data[pos >> 3] >> (7 - (pos & 7))) & 1)
            pos += 1
            length += 1
            if length > maxlen:
                return -2
            rel = code - firsts[length]
            if rel >= 0 and rel < counts[length]:
                out[i] = symbols[offsets[length] + rel]
                break
    return 0


def encode(codes, table: HuffmanTable) -> bytes:
    """Concatenate the canonical codewords of ``codes``."""
    flat = np.asarray(codes, dtype=np.int64).reshape(-1)
    if flat.size == 0:
        return b""
    order = np.argsort(table.symbols, kind="stable")
    sorted_syms = table.symbols[order]
    pos = np.searchsorted(sorted_syms, flat)
    pos = np.minimum(pos, sorted_syms.size - 1)
    if not np.array_equal(sorted_syms[pos], flat):
        bad = flat[sorted_syms[pos] != flat][0]
        raise EntropyError(f"symbol {int(bad)} is not in the Huffman table")
    idx = order[pos]
    nbits = int(table.lengths[idx].sum())
    out = np.zeros((nbits + 7) // 8, dtype=np.uint8)
    written = _encode_kernel(idx, table.codes, table.lengths, out)
    return out[:written].tobytes()


def decode(payload, table: HuffmanTable, n: int) -> np.ndarray:
    """Decode exactly ``n`` symbols from the start of ``payload``."""
    out = np.empty(int(n), dtype=np.int64)
    if n == 0:
        return out
    data = np.frombuffer(payload, dtype=np.uint8)
    counts, firsts, offsets = table._decode_arrays()
    status = _decode_kernel(data, int(n), counts, firsts, offsets, table.symbols, out)
    if status == -1:
        raise EntropyError("truncated Huffman bitstream")
    if status == -2:
        raise EntropyError("bitstream contains a codeword not in the table")
    return out


def encoded_bits(codes, table: HuffmanTable) -> int:
    lengths = table.as_dict()
    return sum(lengths[int(c)] for c in np.asarray(codes).reshape(-1))
