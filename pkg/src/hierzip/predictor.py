"""Multi-dimensional linear and cubic interpolation from a coarse lattice.

A fine point with parity ``p`` sits at fine index ``2*k + p`` along each axis,
where ``k`` is a coarse index. Along odd axes the point lies between coarse
``k`` and ``k + 1``; the cubic stencils additionally reach ``k - 1`` and
``k + 2``. Multi-axis cubic stencils are the diagonal combinations: every
inner corner gets ``9/(8n)`` and every outer diagonal corner ``-1/(8n)``, with
``n = 2**order`` inner corners.

Weighted sums are evaluated as ``S_in / n + (S_in - S_out) / (8 n)`` where
``S_in`` and ``S_out`` sum the inner and outer taps as a balanced pairwise
tree in ascending offset order. Tap counts are powers of two, so equal taps
sum exactly. The form is algebraically identical to the rational weights,
reproduces constants exactly, and is shared by the scalar and vectorized paths so they
agree bit for bit.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .core import PARITIES, Parity, split_dims
from .exceptions import HierzipError

QUALITIES = ("direct", "linear", "cubic")
NEAREST, LINEAR, CUBIC = 0, 1, 2
_KIND_NAMES = ("nearest", "linear", "cubic")


def quality_cap(quality: str) -> int:
    try:
        return QUALITIES.index(quality)
    except ValueError:
        raise HierzipError(f"quality must be one of {QUALITIES}, got {quality!r}") from None


@dataclass(frozen=True)
class Stencil:
    """Coarse-lattice taps relative to the floor coarse index of a fine point."""

    taps: tuple[tuple[tuple[int, int, int], Fraction], ...]
    kind: str
    order: int

    @property
    def weight_sum(self) -> Fraction:
        return sum((w for _, w in self.taps), Fraction(0))

    @property
    def reach(self) -> int:
        return max(max(abs(o) for o in off) for off, _ in self.taps)


def _odd_offsets(parity, values):
    odd = [a for a in range(3) if parity[a]]
    out = []
    for combo in itertools.product(values, repeat=len(odd)):
        off = [0, 0, 0]
        for a, v in zip(odd, combo):
            off[a] = v
        out.append(tuple(off))
    return sorted(out)


def _axis_tier(k: int, m: int) -> int:
    if k - 1 >= 0 and k + 2 < m:
        return CUBIC
    if k + 1 < m:
        return LINEAR
    return NEAREST


def stencil_for(parity, kind: int) -> Stencil:
    parity = Parity(*parity)
    order = parity.order
    if kind == NEAREST:
        taps = [((0, 0, 0), Fraction(1))]
    elif kind == LINEAR:
        taps = [(o, Fraction(1, 2**order)) for o in _odd_offsets(parity, (0, 1))]
    else:
        n = 2**order
        inner = [(o, Fraction(9, 8 * n)) for o in _odd_offsets(parity, (0, 1))]
        outer = [(o, Fraction(-1, 8 * n)) for o in _odd_offsets(parity, (-1, 2))]
        taps = sorted(inner + outer)
    return Stencil(tuple(taps), _KIND_NAMES[kind], order)


def select_stencil(parity, position, coarse_dims, quality: str = "cubic") -> Stencil:
    """Pick the best stencil whose taps all fall inside the coarse lattice.

    Degrades the whole stencil cubic -> linear -> nearest when any odd axis
    lacks the taps for the higher tier.
    """
    parity = Parity(*parity)
    if parity.order == 0:
        raise HierzipError("parity (0, 0, 0) is the coarse lattice itself")
    if any(int(c) % 2 != p for c, p in zip(position, parity)):
        raise HierzipError(f"position {tuple(position)} does not have parity {tuple(parity)}")
    tier = quality_cap(quality)
    for c, p, m in zip(position, parity, coarse_dims):
        if p:
            tier = min(tier, _axis_tier(int(c) // 2, int(m)))
    return stencil_for(parity, tier)


def _pairwise(values):
    values = list(values)
    while len(values) > 1:
        values = [values[i] + values[i + 1] for i in range(0, len(values), 2)]
    return values[0]


def predict_point(coarse: np.ndarray, position, stencil: Stencil) -> float:
    """Evaluate ``stencil`` at fine ``position`` against the coarse array."""
    k = [int(c) // 2 for c in position]
    inner, outer = [], []
    for off, w in stencil.taps:
        idx = tuple(ki + o for ki, o in zip(k, off))
        if any(not 0 <= i < m for i, m in zip(idx, coarse.shape)):
            raise HierzipError(f"stencil tap {idx} outside coarse lattice {coarse.shape}")
        (inner if w > 0 else outer).append(np.float64(coarse[idx]))
    n_in = len(inner)
    s_in = _pairwise(inner)
    if not outer:
        return float(s_in / np.float64(n_in))
    s_out = _pairwise(outer)
    return float(s_in / np.float64(n_in) + (s_in - s_out) / np.float64(8 * n_in))


def _gather(coarse, origin, lo, hi, idx):
    # idx: per-axis global coarse index arrays; clipped so every gather is legal
    out = coarse
    for axis in range(3):
        local = np.clip(idx[axis], lo[axis], hi[axis]) - origin[axis]
        out = out.take(local, axis=axis)
    return out.astype(np.float64, copy=False)


def predict_block(
    coarse: np.ndarray,
    parity,
    index,
    coarse_dims=None,
    quality: str = "cubic",
    origin=(0, 0, 0),
) -> np.ndarray:
    """Predict the sub-block points on the product grid ``index[0] x index[1] x index[2]``.

    Parameters
    ----------
    coarse : ndarray
        Reconstructed coarse values covering the taps, possibly a window of
        the full coarse lattice starting at ``origin``.
    parity : Parity
    index : sequence of three 1D int arrays
        Sub-block (coarse-floor) indices along each axis, in full-lattice terms.
    coarse_dims : tuple, optional
        Full coarse lattice extents; defaults to ``coarse.shape``. Boundary
        tiers depend on these, never on the window.
    """
    parity = Parity(*parity)
    m = tuple(coarse.shape if coarse_dims is None else coarse_dims)
    origin = tuple(int(o) for o in origin)
    lo = tuple(max(0, o) for o in origin)
    hi = tuple(min(mm, o + s) - 1 for mm, o, s in zip(m, origin, coarse.shape))
    index = [np.asarray(ix, dtype=np.int64) for ix in index]
    cap = quality_cap(quality)

    tier = np.full((1, 1, 1), cap, dtype=np.int8)
    for axis in range(3):
        if not parity[axis]:
            continue
        k = index[axis]
        t = np.where((k >= 1) & (k + 2 < m[axis]), CUBIC, np.where(k + 1 < m[axis], LINEAR, NEAREST))
        shape = [1, 1, 1]
        shape[axis] = -1
        tier = np.minimum(tier, t.astype(np.int8).reshape(shape))
    out_shape = tuple(len(ix) for ix in index)
    tier = np.broadcast_to(tier, out_shape)

    pred = _gather(coarse, origin, lo, hi, index)
    top = int(tier.max()) if tier.size else NEAREST
    if top == NEAREST:
        return np.array(pred, dtype=np.float64)

    def tap_sum(offsets):
        return _pairwise(_gather(coarse, origin, lo, hi, [ix + o for ix, o in zip(index, off)]) for off in offsets)

    n_in = 2**parity.order
    # non-finite coarse values (kept as outliers) yield nan predictions; those points become outliers too
    with np.errstate(invalid="ignore", over="ignore"):
        s_in = tap_sum(_odd_offsets(parity, (0, 1)))
        linear = s_in / np.float64(n_in)
        pred = np.where(tier == LINEAR, linear, pred)
        if top == CUBIC:
            s_out = tap_sum(_odd_offsets(parity, (-1, 2)))
            cubic = linear + (s_in - s_out) / np.float64(8 * n_in)
            pred = np.where(tier == CUBIC, cubic, pred)
    return pred


def predict_level(coarse: np.ndarray, fine_dims, quality: str = "cubic") -> dict[Parity, np.ndarray]:
    """Predict all seven parity sub-blocks of the grid of shape ``fine_dims``."""
    fine_dims = tuple(int(d) for d in fine_dims)
    expect = split_dims(fine_dims, (0, 0, 0))
    if coarse.shape != expect:
        raise HierzipError(f"coarse shape {coarse.shape} does not match fine dims {fine_dims}")
    out = {}
    for p in PARITIES:
        dims = split_dims(fine_dims, p)
        out[p] = predict_block(coarse, p, [np.arange(n) for n in dims], coarse.shape, quality)
    return out
