"""End-to-end compression pipeline and full / progressive decompression.

Compression walks the hierarchy coarse to fine. The base lattice is coded by
a recursive base codec. Every finer level is predicted from the
*reconstructed* coarser grid, so the decoder sees exactly the same
predictions. The encoder only reassembles levels that later serve as
predictors.
"""

from __future__ import annotations

import math
import struct
from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_field
from .container import (
    ArchiveHeader,
    CompressedArchive,
    pack_stream_region,
    split_stream_region,
)
from .core import PARITIES, HierarchyLayout, Parity, make_layout, split_dims
from .entropy import HuffmanTable, decode, encode, table_for
from .exceptions import CorruptArchiveError, EntropyError, HierzipError, LayoutError
from .partition import assemble_once, grid_of, halve, subsample
from .predictor import predict_block, quality_cap
from .quantizer import eb_schedule, quantize_block, reconstruct

#: Base-codec recursion stops once any axis of the base block is <= this.
ANCHOR_EDGE = 8

_SUB = struct.Struct("<BQIQ")


def _little(dtype) -> np.dtype:
    return np.dtype(dtype).newbyteorder("<")


@contextmanager
def _executor(n_threads: int):
    if n_threads and n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            yield pool.map
    else:
        yield map


def value_range(field: np.ndarray) -> tuple[float, float]:
    finite = field[np.isfinite(field)]
    if finite.size == 0:
        return 0.0, 0.0
    return float(finite.min()), float(finite.max())


def resolve_error_bound(field: np.ndarray, eb: float, mode: str = "rel"):
    """Absolute bound for ``eb`` in ``mode`` ('abs' or 'rel').

    Returns ``(eb_abs, vmin, vmax, degenerate)``; ``degenerate`` marks a
    relative bound on a field with zero value range, which is then coded
    losslessly.
    """
    if mode not in ("abs", "rel"):
        raise HierzipError(f"error-bound mode must be 'abs' or 'rel', got {mode!r}")
    if not eb > 0 or not math.isfinite(eb):
        raise LayoutError(f"error bound must be positive and finite, got {eb}")
    vmin, vmax = value_range(field)
    if mode == "abs":
        return float(eb), vmin, vmax, False
    span = vmax - vmin
    if span == 0:
        return 0.0, vmin, vmax, True
    return float(eb) * span, vmin, vmax, False


def _code_block(orig, pred, eb, level, parity):
    q, recon = quantize_block(orig, pred, eb, level=level, parity=parity)
    table = table_for(q.codes) if q.codes.size else HuffmanTable.from_lengths([0], [1])
    # a one-symbol table implies every code, so its bitstream is omitted
    bits = encode(q.codes, table) if table.symbols.size > 1 else b""
    region = pack_stream_region(bits, q.outlier_index, q.outlier_values, orig.dtype)
    return (level, tuple(parity), table, q.codes.size, q.outlier_index.size, region), recon


def _refine_encode(fine, coarse, eb, quality, level, pmap):
    """Predict, quantize and entropy-code the seven parity blocks of ``fine``."""

    def one(p):
        dims = split_dims(fine.shape, p)
        pred = predict_block(coarse, p, [np.arange(n) for n in dims], coarse.shape, quality)
        return _code_block(subsample(fine, (2, 2, 2), p), pred, eb, level, p)

    return list(pmap(one, PARITIES))


# ---------------------------------------------------------------- base codec


def _base_shapes(shape):
    shapes = [tuple(shape)]
    while all(n > ANCHOR_EDGE for n in shapes[-1]):
        shapes.append(halve(shapes[-1]))
    return shapes


def compress_base(block: np.ndarray, eb: float, quality: str = "cubic", *, n_threads: int = 1):
    """Code the base lattice by recursive self-application.

    Returns ``(payload, reconstruction)``. The terminal anchor block (some axis
    <= 8) is stored verbatim; every recursion round adds seven streams coded
    at ``eb``.
    """
    shapes = _base_shapes(block.shape)
    rounds = len(shapes) - 1
    step = 2**rounds
    anchor = subsample(block, (step, step, step)) if rounds else np.ascontiguousarray(block)
    parts = [struct.pack("<3QB", *block.shape, rounds), anchor.astype(_little(block.dtype)).tobytes()]
    recon = anchor.copy()
    with _executor(n_threads) as pmap:
        for j in range(rounds - 1, -1, -1):
            fine = subsample(block, (2**j,) * 3) if j else block
            coded = _refine_encode(fine, recon, eb, quality, 1, pmap)
            for (_, par, table, n_sym, n_out, region), _ in coded:
                parts.append(_SUB.pack(Parity(*par).bits, n_sym, n_out, len(region)))
                parts.append(table.to_bytes())
                parts.append(region)
            recon = assemble_once(recon, {p: r for p, (_, r) in zip(PARITIES, coded)}, fine.shape)
    return b"".join(parts), recon


def decompress_base(payload: bytes, dtype, eb: float, quality: str = "cubic") -> np.ndarray:
    """Inverse of :func:`compress_base`."""
    dtype = np.dtype(dtype)
    try:
        *shape, rounds = struct.unpack_from("<3QB", payload, 0)
        off = struct.calcsize("<3QB")
        shapes = _base_shapes(shape)
        if len(shapes) - 1 != rounds:
            raise CorruptArchiveError("base payload round count disagrees with its shape")
        anchor_shape = shapes[-1]
        count = math.prod(anchor_shape)
        recon = np.frombuffer(payload, dtype=_little(dtype), count=count, offset=off)
        recon = recon.astype(dtype).reshape(anchor_shape)
        off += count * dtype.itemsize
        for j in range(rounds - 1, -1, -1):
            fine_shape = shapes[j]
            blocks = {}
            for _ in PARITIES:
                bits, n_sym, n_out, length = _SUB.unpack_from(payload, off)
                off += _SUB.size
                table, off = HuffmanTable.from_bytes(payload, off)
                region = payload[off : off + length]
                if len(region) != length:
                    raise CorruptArchiveError("truncated base stream")
                off += length
                p = Parity.from_bits(bits)
                dims = split_dims(fine_shape, p)
                if n_sym != math.prod(dims):
                    raise CorruptArchiveError("base stream symbol count mismatch")
                stream = _decode_region(region, table, n_sym, n_out, dtype, dims)
                pred = predict_block(recon, p, [np.arange(n) for n in dims], recon.shape, quality)
                blocks[p] = stream.reconstruct(pred, eb, dtype)
            recon = assemble_once(recon, blocks, fine_shape)
    except (struct.error, ValueError, EntropyError) as exc:
        if isinstance(exc, CorruptArchiveError):
            raise
        raise CorruptArchiveError(f"corrupt base payload: {exc}") from None
    return recon


# ---------------------------------------------------------------- compression


def compress(
    field: np.ndarray,
    eb: float = 1e-3,
    *,
    mode: str = "rel",
    levels: int = 3,
    quality: str = "cubic",
    adaptive: bool = True,
    n_threads: int = 1,
    return_reconstruction: bool = False,
):
    """Compress a 3D float32/float64 field.

    Parameters
    ----------
    field : ndarray, shape (nz, ny, nx)
    eb : float
        Error bound, absolute or relative to the value range per ``mode``.
    mode : {'rel', 'abs'}
    levels : {2, 3}
    quality : {'direct', 'linear', 'cubic'}
        Highest interpolation tier the predictor may use.
    adaptive : bool
        Tighten coarser levels by the 2.5x schedule; ``False`` uses one bound.
    n_threads : int
        Worker threads for per-sub-block work. Output bytes do not depend on it.
    return_reconstruction : bool
        Also return the encoder-side reconstruction, which the decoder must
        reproduce bit for bit.

    Returns
    -------
    CompressedArchive, or ``(archive, reconstruction)``
    """
    field = check_field(field, min_dim=2)
    quality_cap(quality)
    eb_abs, vmin, vmax, degenerate = resolve_error_bound(field, eb, mode)
    if degenerate:
        make_layout(field.shape, levels, 1.0)
        layout = HierarchyLayout(field.shape, levels, (0.0,) * levels)
    else:
        layout = make_layout(field.shape, levels, eb_abs, adaptive=adaptive)
    header = ArchiveHeader(
        dims=field.shape,
        dtype=field.dtype,
        levels=levels,
        eb_schedule=layout.eb_per_level,
        value_min=vmin,
        value_max=vmax,
        quality=quality,
        rel_mode=mode == "rel",
        degenerate=degenerate,
        adaptive=adaptive,
        eb_requested=float(eb),
    )
    base_payload, recon = compress_base(
        grid_of(field, layout, 1), layout.eb_per_level[0], quality, n_threads=n_threads
    )
    streams = []
    with _executor(n_threads) as pmap:
        for level in range(2, levels + 1):
            fine = grid_of(field, layout, level)
            coded = _refine_encode(fine, recon, layout.eb_per_level[level - 1], quality, level, pmap)
            streams += [s for s, _ in coded]
            if level < levels or return_reconstruction:
                recon = assemble_once(recon, {p: r for p, (_, r) in zip(PARITIES, coded)}, fine.shape)
    archive = CompressedArchive.build(header, base_payload, streams)
    if return_reconstruction:
        return archive, recon
    return archive


# ---------------------------------------------------------------- decompression


@dataclass
class DecodedStream:
    codes: np.ndarray
    outlier_index: np.ndarray
    outlier_values: np.ndarray

    def reconstruct(self, pred, eb, dtype, start=(0, 0, 0)) -> np.ndarray:
        """Reconstruct the window of this sub-block that ``pred`` covers, from ``start``."""
        sl = tuple(slice(s, s + n) for s, n in zip(start, pred.shape))
        recon = reconstruct(pred, self.codes[sl], eb, dtype)
        if self.outlier_index.size:
            coords = np.unravel_index(self.outlier_index, self.codes.shape)
            inside = np.ones(self.outlier_index.size, dtype=bool)
            for c, s, n in zip(coords, start, pred.shape):
                inside &= (c >= s) & (c < s + n)
            if inside.any():
                local = tuple(c[inside] - s for c, s in zip(coords, start))
                recon[local] = self.outlier_values[inside]
        return recon


def _decode_region(region, table, n_sym, n_out, dtype, shape) -> DecodedStream:
    bits, idx, vals = split_stream_region(region, n_out, dtype)
    if table.symbols.size == 1:
        if bits:
            raise CorruptArchiveError("single-symbol stream carries a bitstream")
        codes = np.full(shape, table.symbols[0], dtype=np.int32)
    else:
        codes = decode(bits, table, n_sym).astype(np.int32).reshape(shape)
    if idx.size and (idx.max() >= n_sym):
        raise CorruptArchiveError("outlier index outside its sub-block")
    return DecodedStream(codes, idx, vals.astype(dtype))


@dataclass
class DecodeStats:
    """Work counters filled by :class:`Decoder`."""

    streams_decoded: dict = field(default_factory=dict)  # level -> set of parities
    points_predicted: dict = field(default_factory=dict)  # level -> count

    def n_decoded(self, level: int) -> int:
        return len(self.streams_decoded.get(level, ()))


def _parity_range(lo: int, hi: int, p: int):
    """Fine offset of the first index with parity ``p`` in [lo, hi) and the k range."""
    f0 = lo + ((p - lo) % 2)
    k0 = (f0 - p) // 2
    k1 = max(k0, (hi - p + 1) // 2)
    return f0 - lo, k0, k1


class Decoder:
    """Stateful decoder that reconstructs arbitrary windows level by level.

    Streams are decoded lazily and cached, always in full.
    """

    def __init__(self, archive: CompressedArchive, n_threads: int = 1):
        if not isinstance(archive, CompressedArchive):
            archive = CompressedArchive.from_bytes(archive)
        self.archive = archive
        h = archive.header
        self.header = h
        self.layout = HierarchyLayout(h.dims, h.levels, h.eb_schedule)
        self.dtype = np.dtype(h.dtype)
        self.n_threads = n_threads
        self.stats = DecodeStats()
        self._base = None
        self._streams = {}

    def base(self) -> np.ndarray:
        if self._base is None:
            h = self.header
            base = decompress_base(self.archive.base_payload(), self.dtype, h.eb_for(1), h.quality)
            if base.shape != self.layout.grid_dims(1):
                raise CorruptArchiveError("base block shape does not match header dims")
            self._base = base
        return self._base

    def stream(self, level: int, parity: Parity) -> DecodedStream:
        key = (level, parity)
        if key not in self._streams:
            entry = self.archive.entry(level, parity)
            dims = self.layout.subblock_dims(level, parity)
            if entry.symbol_count != math.prod(dims):
                raise CorruptArchiveError("stream symbol count does not match layout")
            region = self.archive.region(entry)
            self._streams[key] = _decode_region(
                region, entry.table, entry.symbol_count, entry.outlier_count, self.dtype, dims
            )
            self.stats.streams_decoded.setdefault(level, set()).add(parity)
        return self._streams[key]

    def refine(self, level: int, coarse: np.ndarray, origin, lo, hi) -> np.ndarray:
        """Reconstruct the window ``[lo, hi)`` of the level-``level`` grid.

        ``coarse`` is a window of the level-``level - 1`` grid starting at
        ``origin`` that covers every tap the window needs.
        """
        coarse_dims = self.layout.grid_dims(level - 1)
        eb = self.header.eb_for(level)
        shape = tuple(b - a for a, b in zip(lo, hi))
        out = np.empty(shape, dtype=self.dtype)

        rng = [_parity_range(a, b, 0) for a, b in zip(lo, hi)]
        if all(k1 > k0 for _, k0, k1 in rng):
            src = tuple(slice(k0 - o, k1 - o) for (_, k0, k1), o in zip(rng, origin))
            dst = tuple(slice(f, None, 2) for f, _, _ in rng)
            out[dst] = coarse[src]

        todo = []
        for p in PARITIES:
            rng = [_parity_range(a, b, pa) for a, b, pa in zip(lo, hi, p)]
            if all(k1 > k0 for _, k0, k1 in rng):
                todo.append((p, rng))
        for p, _ in todo:
            self.stream(level, p)

        def one(item):
            p, rng = item
            index = [np.arange(k0, k1) for _, k0, k1 in rng]
            pred = predict_block(coarse, p, index, coarse_dims, self.header.quality, origin)
            return self._streams[(level, p)].reconstruct(pred, eb, self.dtype, [k0 for _, k0, _ in rng])

        with _executor(self.n_threads) as pmap:
            results = list(pmap(one, todo))
        done = self.stats.points_predicted.get(level, 0)
        for (p, rng), recon in zip(todo, results):
            dst = tuple(slice(f, None, 2) for f, _, _ in rng)
            out[dst] = recon
            done += recon.size
        self.stats.points_predicted[level] = done
        return out

    def full_level(self, level: int) -> np.ndarray:
        grid = self.base()
        for k in range(2, level + 1):
            grid = self.refine(k, grid, (0, 0, 0), (0, 0, 0), self.layout.grid_dims(k))
        return grid


def _as_archive(archive) -> CompressedArchive:
    if isinstance(archive, CompressedArchive):
        return archive
    return CompressedArchive.from_bytes(archive)


def decompress_full(archive, *, n_threads: int = 1) -> np.ndarray:
    """Reconstruct the whole field at full resolution."""
    dec = Decoder(_as_archive(archive), n_threads)
    return dec.full_level(dec.layout.levels)


def decompress_to_level(archive, level: int, *, n_threads: int = 1) -> np.ndarray:
    """Reconstruct the stride-``2**(levels - level)`` lattice only."""
    dec = Decoder(_as_archive(archive), n_threads)
    if not 1 <= level <= dec.layout.levels:
        raise HierzipError(f"level must be in 1..{dec.layout.levels}, got {level}")
    return dec.full_level(level)


__all__ = [
    "ANCHOR_EDGE",
    "Decoder",
    "DecodeStats",
    "compress",
    "compress_base",
    "decompress_base",
    "decompress_full",
    "decompress_to_level",
    "eb_schedule",
    "resolve_error_bound",
]
