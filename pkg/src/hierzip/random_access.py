"""Decompress a box or slice at full resolution without rebuilding the field.

Planning runs fine to coarse. At each refinement step the window of the fine
grid that must be reconstructed determines which parity sub-blocks are
touched, and the coarse window their stencils read. Along an odd axis a
stencil reaches coarse ``k - 1 .. k + 2`` (three fine units either side);
along an even axis it reads coarse ``k`` only, which is why a slice with even
index decodes only the three streams whose slice-axis parity is 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .codec import Decoder, _as_archive
from .container import ArchiveHeader
from .core import AXES, PARITIES, Box, HierarchyLayout
from .exceptions import HierzipError

#: Coarse taps reach this many coarse indices below / above ``k`` on odd axes.
HALO_BELOW, HALO_ABOVE = 1, 2


def _parity_k(lo: int, hi: int, p: int) -> tuple[int, int]:
    f0 = lo + ((p - lo) % 2)
    k0 = (f0 - p) // 2
    return k0, max(k0, (hi - p + 1) // 2)


@dataclass
class AccessPlan:
    """Windows, required streams and work counters for one ROI.

    ``windows[level]`` is the ``(lo, hi)`` window of the level grid that gets
    reconstructed; ``windows[levels]`` is the ROI itself and ``windows[1]``
    the whole base lattice.
    """

    roi: Box
    layout: HierarchyLayout
    windows: dict = field(default_factory=dict)
    required: dict = field(default_factory=dict)  # level -> list[Parity]
    points: dict = field(default_factory=dict)  # level -> planned predicted points

    def streams_required(self, level: int) -> int:
        return len(self.required.get(level, ()))

    @property
    def streams_total(self) -> int:
        return 7 * (self.layout.levels - 1)

    def points_total(self, level: int) -> int:
        return self.layout.level_count(level)

    def prediction_skipped(self, level: int) -> float:
        return 1.0 - self.points.get(level, 0) / self.points_total(level)

    def summary(self) -> dict:
        out = {"roi": self.roi.format()}
        for level in range(2, self.layout.levels + 1):
            out[f"l{level}_streams"] = f"{self.streams_required(level)}/7"
            out[f"l{level}_predicted"] = f"{self.points.get(level, 0)}/{self.points_total(level)}"
        return out


def plan_access(header, roi: Box) -> AccessPlan:
    """Compute the dependency closure of ``roi``, finest level first."""
    if not isinstance(header, ArchiveHeader):
        header = header.header
    layout = HierarchyLayout(header.dims, header.levels, header.eb_schedule)
    if not isinstance(roi, Box):
        roi = Box(*roi)
    if not roi.within(layout.dims):
        raise HierzipError(f"roi {roi.format()} exceeds dims {layout.dims}")
    plan = AccessPlan(roi, layout)
    lo, hi = roi.lo, roi.hi
    for level in range(layout.levels, 1, -1):
        plan.windows[level] = (lo, hi)
        coarse_dims = layout.grid_dims(level - 1)
        # even-lattice points inside the window come straight from the coarse grid
        c_lo, c_hi = [], []
        for a in range(3):
            k0, k1 = _parity_k(lo[a], hi[a], 0)
            c_lo.append(k0 if k1 > k0 else math.inf)
            c_hi.append(k1 if k1 > k0 else -math.inf)
        needed, count = [], 0
        for p in PARITIES:
            ks = [_parity_k(lo[a], hi[a], p[a]) for a in range(3)]
            if any(k1 <= k0 for k0, k1 in ks):
                continue
            needed.append(p)
            count += math.prod(k1 - k0 for k0, k1 in ks)
            for a, (k0, k1) in enumerate(ks):
                if p[a]:
                    k0, k1 = max(0, k0 - HALO_BELOW), min(coarse_dims[a], k1 + HALO_ABOVE)
                c_lo[a] = min(c_lo[a], k0)
                c_hi[a] = max(c_hi[a], k1)
        plan.required[level] = needed
        plan.points[level] = count
        lo, hi = tuple(int(v) for v in c_lo), tuple(int(v) for v in c_hi)
    plan.windows[1] = ((0, 0, 0), layout.grid_dims(1))
    plan.points[1] = layout.level_count(1)
    return plan


def decompress_box(archive, roi: Box, *, n_threads: int = 1, return_plan: bool = False):
    """Reconstruct ``roi`` exactly as :func:`~hierzip.codec.decompress_full` would.

    With ``return_plan=True`` also returns ``(plan, stats)`` where ``stats``
    records streams actually decoded and points actually predicted.
    """
    archive = _as_archive(archive)
    if not isinstance(roi, Box):
        roi = Box(*roi)
    plan = plan_access(archive.header, roi)
    dec = Decoder(archive, n_threads)
    grid = dec.base()
    origin = (0, 0, 0)
    for level in range(2, plan.layout.levels + 1):
        c_lo, c_hi = plan.windows[level - 1]
        window = grid[tuple(slice(a - o, b - o) for a, b, o in zip(c_lo, c_hi, origin))]
        lo, hi = plan.windows[level]
        grid = dec.refine(level, window, c_lo, lo, hi)
        origin = lo
    if return_plan:
        return grid, plan, dec.stats
    return grid


def parse_slice(text: str) -> tuple[int, int]:
    """Parse ``axis=index`` (axis one of z, y, x)."""
    name, sep, idx = text.partition("=")
    name = name.strip().lower()
    if not sep or name not in AXES:
        raise HierzipError(f"slice must look like z=10, got {text!r}")
    return AXES.index(name), int(idx)


def slice_box(dims, axis: int, index: int) -> Box:
    if not 0 <= axis < 3:
        raise HierzipError(f"axis must be 0, 1 or 2, got {axis}")
    if not 0 <= index < dims[axis]:
        raise HierzipError(f"slice index {index} out of range for axis of length {dims[axis]}")
    lo = [0, 0, 0]
    hi = list(dims)
    lo[axis], hi[axis] = index, index + 1
    return Box(tuple(lo), tuple(hi))


def decompress_slice(archive, axis, index: int, *, n_threads: int = 1, return_plan: bool = False):
    """Reconstruct the 2D slice ``index`` normal to ``axis`` (0/1/2 or 'z'/'y'/'x')."""
    archive = _as_archive(archive)
    if isinstance(axis, str):
        if axis.lower() not in AXES:
            raise HierzipError(f"unknown axis {axis!r}")
        axis = AXES.index(axis.lower())
    box = slice_box(archive.header.dims, int(axis), int(index))
    res = decompress_box(archive, box, n_threads=n_threads, return_plan=return_plan)
    if return_plan:
        grid, plan, stats = res
        return np.take(grid, 0, axis=axis), plan, stats
    return np.take(res, 0, axis=axis)


__all__ = [
    "AccessPlan",
    "decompress_box",
    "decompress_slice",
    "parse_slice",
    "plan_access",
    "slice_box",
]
