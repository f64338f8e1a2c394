"""Stride sampling of a field into parity sub-blocks and the inverse reassembly."""

from __future__ import annotations

import numpy as np

from .core import PARITIES, HierarchyLayout, Parity, ceil_div, split_dims
from .exceptions import HierzipError, LayoutError


def subsample(field: np.ndarray, stride, offset=(0, 0, 0)) -> np.ndarray:
    """Return the contiguous lattice ``field[offset + stride * k]``."""
    stride = tuple(int(s) for s in stride)
    offset = tuple(int(o) for o in offset)
    for o, s, n in zip(offset, stride, field.shape):
        if s < 1 or s > n:
            raise HierzipError(f"stride {stride} invalid for shape {field.shape}")
        if not 0 <= o < s:
            raise HierzipError(f"offset {offset} out of range for stride {stride}")
    sl = tuple(slice(o, None, s) for o, s in zip(offset, stride))
    return np.ascontiguousarray(field[sl])


def split_once(field: np.ndarray) -> tuple[np.ndarray, dict[Parity, np.ndarray]]:
    """Split into the even lattice and its seven parity sub-blocks."""
    if min(field.shape) < 2:
        raise LayoutError(f"cannot split shape {field.shape}: every axis needs >= 2 points")
    base = subsample(field, (2, 2, 2))
    predicted = {p: subsample(field, (2, 2, 2), p) for p in PARITIES}
    return base, predicted


def assemble_once(base: np.ndarray, predicted: dict, dims) -> np.ndarray:
    """Interleave ``base`` and the parity sub-blocks into a grid of shape ``dims``."""
    dims = tuple(int(d) for d in dims)
    if base.shape != split_dims(dims, (0, 0, 0)):
        raise LayoutError(f"base shape {base.shape} inconsistent with target {dims}")
    out = np.empty(dims, dtype=base.dtype)
    out[::2, ::2, ::2] = base
    for p in PARITIES:
        block = predicted[p]
        if block.shape != split_dims(dims, p):
            raise LayoutError(f"sub-block {tuple(p)} shape {block.shape} inconsistent with {dims}")
        if block.dtype != base.dtype:
            raise LayoutError("sub-blocks must share one dtype")
        out[p.z :: 2, p.y :: 2, p.x :: 2] = block
    return out


def split_hierarchy(field: np.ndarray, layout: HierarchyLayout):
    """Split into ``{1: base}`` and ``{level: {parity: sub-block}}`` for levels 2..L."""
    if field.shape != layout.dims:
        raise LayoutError(f"field shape {field.shape} does not match layout {layout.dims}")
    blocks: dict[int, object] = {}
    grid = field
    for level in range(layout.levels, 1, -1):
        grid, predicted = split_once(grid)
        blocks[level] = predicted
    blocks[1] = grid
    return blocks


def assemble_hierarchy(blocks, layout: HierarchyLayout, upto: int | None = None) -> np.ndarray:
    """Inverse of :func:`split_hierarchy`, optionally stopping at level ``upto``."""
    upto = layout.levels if upto is None else upto
    grid = blocks[1]
    for level in range(2, upto + 1):
        grid = assemble_once(grid, blocks[level], layout.grid_dims(level))
    return grid


def grid_of(field: np.ndarray, layout: HierarchyLayout, level: int) -> np.ndarray:
    s = layout.stride(level)
    return subsample(field, (s, s, s)) if s > 1 else field


def halve(dims) -> tuple[int, int, int]:
    return tuple(ceil_div(int(n), 2) for n in dims)
