"""Region-of-interest selection by per-slice or per-block statistics.

Units are either whole slices normal to one axis or cubic blocks of a fixed
edge length that tile the domain in C order (the last block along an axis may
be smaller). Statistics are computed on decompressed data.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._validation import check_field
from .core import AXES, Box, ceil_div
from .exceptions import HierzipError

STATS = ("range", "max")


@dataclass(frozen=True)
class Unit:
    """``kind`` is 'slice' (``size`` is the axis) or 'block' (``size`` is the edge)."""

    kind: str
    size: int

    @classmethod
    def parse(cls, text: str) -> "Unit":
        """Parse ``slice=z`` or ``block=16``."""
        kind, sep, arg = text.partition("=")
        kind = kind.strip().lower()
        if not sep:
            raise HierzipError(f"unit must look like slice=z or block=16, got {text!r}")
        if kind == "slice":
            arg = arg.strip().lower()
            if arg not in AXES:
                raise HierzipError(f"unknown slice axis {arg!r}")
            return cls("slice", AXES.index(arg))
        if kind == "block":
            return cls("block", int(arg))
        raise HierzipError(f"unknown unit kind {kind!r}")

    def grid(self, dims) -> tuple[int, ...]:
        if self.kind == "slice":
            return (dims[self.size],)
        return tuple(ceil_div(n, self.size) for n in dims)

    def count(self, dims) -> int:
        return math.prod(self.grid(dims))

    def box(self, dims, unit_id: int) -> Box:
        if not 0 <= unit_id < self.count(dims):
            raise HierzipError(f"unit id {unit_id} out of range")
        if self.kind == "slice":
            lo, hi = [0, 0, 0], list(dims)
            lo[self.size], hi[self.size] = unit_id, unit_id + 1
            return Box(tuple(lo), tuple(hi))
        idx = np.unravel_index(unit_id, self.grid(dims))
        lo = tuple(int(i) * self.size for i in idx)
        return Box(lo, tuple(min(a + self.size, n) for a, n in zip(lo, dims)))


def _as_unit(unit) -> Unit:
    if isinstance(unit, Unit):
        return unit
    if isinstance(unit, str):
        return Unit.parse(unit)
    kind, size = unit
    if kind == "slice" and isinstance(size, str):
        size = AXES.index(size)
    return Unit(kind, int(size))


def _reduce(field, unit: Unit, ufunc):
    if unit.kind == "slice":
        others = tuple(a for a in range(3) if a != unit.size)
        return ufunc.reduce(field, axis=others)
    if unit.size < 1 or unit.size > max(field.shape):
        raise HierzipError(f"block edge {unit.size} invalid for shape {field.shape}")
    out = field
    for axis, n in enumerate(field.shape):
        out = ufunc.reduceat(out, np.arange(0, n, unit.size), axis=axis)
    return out


def unit_stats(field, unit, stat: str = "max") -> list[tuple[int, float]]:
    """``(unit id, statistic)`` for every unit, in id order."""
    field = check_field(field)
    unit = _as_unit(unit)
    if stat not in STATS:
        raise HierzipError(f"stat must be one of {STATS}, got {stat!r}")
    hi = _reduce(field, unit, np.maximum).astype(np.float64)
    values = hi - _reduce(field, unit, np.minimum) if stat == "range" else hi
    return list(enumerate(np.asarray(values, dtype=np.float64).reshape(-1).tolist()))


def select_threshold(stats, threshold: float) -> list[int]:
    """Units whose statistic is strictly greater than ``threshold``."""
    return sorted(uid for uid, v in stats if v > threshold)


def select_top_percent(stats, percent: float) -> list[int]:
    """The ``ceil(percent% * n)`` units with the largest statistic; ties go to lower ids."""
    if not 0 < percent <= 100:
        raise HierzipError(f"percent must lie in (0, 100], got {percent}")
    stats = list(stats)
    k = math.ceil(percent / 100.0 * len(stats))
    ranked = sorted(stats, key=lambda s: (-s[1], s[0]))
    return sorted(uid for uid, _ in ranked[:k])


def boxes_for(dims, unit, ids) -> list[Box]:
    unit = _as_unit(unit)
    return [unit.box(dims, i) for i in ids]


def format_boxes(boxes) -> str:
    return "".join(b.format() + "\n" for b in boxes)


def parse_boxes(text: str) -> list[Box]:
    return [Box.parse(line) for line in text.splitlines() if line.strip() and not line.startswith("#")]
