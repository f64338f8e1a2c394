"""Lattice geometry shared by every stage of the codec.

Fields are plain ``numpy`` arrays of shape ``(nz, ny, nx)`` in C order
(x varies fastest). The types here describe how such a field is carved into
a coarse base lattice plus, per refinement step, seven parity sub-blocks.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple


from ._validation import check_dims
from .exceptions import HierzipError, LayoutError
from .quantizer import eb_schedule

AXES = ("z", "y", "x")


class Parity(NamedTuple):
    """Odd/even offset pattern of a sub-block relative to its coarse lattice."""

    z: int
    y: int
    x: int

    @property
    def order(self) -> int:
        """Number of odd axes, i.e. the interpolation dimensionality."""
        return self.z + self.y + self.x

    @property
    def bits(self) -> int:
        return (self.z << 2) | (self.y << 1) | self.x

    @classmethod
    def from_bits(cls, bits: int) -> "Parity":
        if not 1 <= bits <= 7:
            raise HierzipError(f"parity bits must be in 1..7, got {bits}")
        return cls((bits >> 2) & 1, (bits >> 1) & 1, bits & 1)

    @property
    def label(self) -> str:
        # b/c/e are single-axis offsets, d/f/g two-axis, h the body diagonal
        return _LABELS[self]


PARITIES: tuple[Parity, ...] = tuple(
    Parity(*p) for p in itertools.product((0, 1), repeat=3) if any(p)
)
_LABELS = {
    Parity(0, 0, 1): "b",
    Parity(0, 1, 0): "c",
    Parity(0, 1, 1): "d",
    Parity(1, 0, 0): "e",
    Parity(1, 0, 1): "f",
    Parity(1, 1, 0): "g",
    Parity(1, 1, 1): "h",
}


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def split_dims(dims, parity) -> tuple[int, int, int]:
    """Extent of the parity sub-block of a grid: ceil(n/2) for even, floor(n/2) for odd."""
    return tuple((n + 1) // 2 if p == 0 else n // 2 for n, p in zip(dims, parity))


@dataclass(frozen=True)
class HierarchyLayout:
    """Geometry of a ``levels``-deep stride hierarchy over a field of shape ``dims``.

    Level 1 is the base lattice with stride ``2**(levels-1)``. Level ``k > 1``
    holds the seven parity sub-blocks that refine the stride-``2**(levels-k+1)``
    grid into the stride-``2**(levels-k)`` grid.
    """

    dims: tuple[int, int, int]
    levels: int
    eb_per_level: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "dims", check_dims(self.dims))
        if self.levels not in (2, 3):
            raise LayoutError(f"levels must be 2 or 3, got {self.levels}")
        need = 2 ** (self.levels - 1)
        if min(self.dims) < need:
            raise LayoutError(
                f"dims {self.dims} too small for {self.levels} levels (need >= {need} per axis)"
            )
        if self.eb_per_level is not None:
            ebs = tuple(float(e) for e in self.eb_per_level)
            if len(ebs) != self.levels:
                raise LayoutError("eb_per_level must have one entry per level")
            object.__setattr__(self, "eb_per_level", ebs)

    @property
    def base_stride(self) -> int:
        return 2 ** (self.levels - 1)

    @property
    def size(self) -> int:
        return math.prod(self.dims)

    def stride(self, level: int) -> int:
        """Fine-grid spacing of the lattice that is complete once ``level`` is decoded."""
        self._check_level(level)
        return 2 ** (self.levels - level)

    def grid_dims(self, level: int) -> tuple[int, int, int]:
        """Shape of the reconstructed grid after decoding levels ``1..level``."""
        s = self.stride(level)
        return tuple(ceil_div(n, s) for n in self.dims)

    def subblock_dims(self, level: int, parity) -> tuple[int, int, int]:
        if level == 1:
            return self.grid_dims(1)
        return split_dims(self.grid_dims(level), parity)

    def level_count(self, level: int) -> int:
        if level == 1:
            return math.prod(self.grid_dims(1))
        return sum(math.prod(self.subblock_dims(level, p)) for p in PARITIES)

    def level_counts(self) -> list[int]:
        return [self.level_count(k) for k in range(1, self.levels + 1)]

    def locate(self, coord) -> tuple[int, Parity | None, tuple[int, int, int]]:
        """Map a fine-grid coordinate to ``(level, parity, local index)``.

        Parity is ``None`` for base-lattice points.
        """
        coord = tuple(int(c) for c in coord)
        if any(not 0 <= c < n for c, n in zip(coord, self.dims)):
            raise HierzipError(f"coordinate {coord} outside dims {self.dims}")
        for level in range(self.levels, 1, -1):
            half = self.stride(level)
            g = tuple(c // half for c in coord)
            if any(c % half for c in coord):
                continue
            par = Parity(*(gi % 2 for gi in g))
            if par.order == 0:
                continue
            return level, par, tuple(gi // 2 for gi in g)
        s = self.base_stride
        return 1, None, tuple(c // s for c in coord)

    def coord_of(self, level: int, parity, index) -> tuple[int, int, int]:
        """Inverse of :meth:`locate`."""
        if level == 1:
            s = self.base_stride
            return tuple(int(i) * s for i in index)
        half = self.stride(level)
        return tuple((2 * int(i) + p) * half for i, p in zip(index, parity))

    def _check_level(self, level):
        if not 1 <= level <= self.levels:
            raise HierzipError(f"level must be in 1..{self.levels}, got {level}")


def make_layout(dims, levels: int, eb_user: float, *, adaptive: bool = True) -> HierarchyLayout:
    """Build the layout used for compression, including the per-level error bounds."""
    dims = check_dims(dims)
    if levels not in (2, 3):
        raise LayoutError(f"levels must be 2 or 3, got {levels}")
    need = 2**levels
    if min(dims) < need:
        raise LayoutError(f"every dimension must be >= {need} for {levels} levels, got {dims}")
    if not eb_user > 0:
        raise LayoutError(f"error bound must be positive, got {eb_user}")
    return HierarchyLayout(dims, levels, eb_schedule(eb_user, levels, adaptive=adaptive))


@dataclass(frozen=True)
class Box:
    """Axis-aligned half-open index box ``[lo, hi)`` in fine-grid coordinates."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lo)
        hi = tuple(int(v) for v in self.hi)
        if len(lo) != 3 or len(hi) != 3:
            raise HierzipError("box needs three (lo, hi) pairs")
        if any(a < 0 or a >= b for a, b in zip(lo, hi)):
            raise HierzipError(f"empty or negative box {lo}..{hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def full(cls, dims) -> "Box":
        return cls((0, 0, 0), tuple(dims))

    @classmethod
    def parse(cls, text: str) -> "Box":
        """Parse ``z0:z1,y0:y1,x0:x1``."""
        parts = text.strip().split(",")
        if len(parts) != 3:
            raise HierzipError(f"box must look like z0:z1,y0:y1,x0:x1, got {text!r}")
        lo, hi = [], []
        for part in parts:
            a, sep, b = part.partition(":")
            if not sep:
                raise HierzipError(f"bad box range {part!r}")
            lo.append(int(a))
            hi.append(int(b))
        return cls(tuple(lo), tuple(hi))

    def format(self) -> str:
        return ",".join(f"{a}:{b}" for a, b in zip(self.lo, self.hi))

    @property
    def shape(self) -> tuple[int, int, int]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def slices(self) -> tuple[slice, slice, slice]:
        return tuple(slice(a, b) for a, b in zip(self.lo, self.hi))

    def within(self, dims) -> bool:
        return all(b <= n for b, n in zip(self.hi, dims))

    def contains(self, other: "Box") -> bool:
        return all(a <= c and d <= b for a, b, c, d in zip(self.lo, self.hi, other.lo, other.hi))
