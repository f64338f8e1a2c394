"""Error-bounded linear quantization and the per-level error-bound schedule."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import HierzipError, LayoutError

#: Largest admissible ``|code|``; larger residuals become outliers.
RADIUS = 32767
#: Code stored in place of an outlier; keeps the alphabet within int16.
SENTINEL = -32768
#: Ratio between consecutive per-level bounds (finer / coarser).
LEVEL_RATIO = 2.5


def eb_schedule(eb_user: float, levels: int, *, adaptive: bool = True) -> tuple[float, ...]:
    """Per-level absolute bounds, coarsest first.

    The finest level receives ``eb_user``; every coarser level gets the next
    finer bound divided by :data:`LEVEL_RATIO`. With ``adaptive=False`` all
    levels share ``eb_user``.
    """
    if not eb_user > 0 or not math.isfinite(eb_user):
        raise LayoutError(f"error bound must be positive and finite, got {eb_user}")
    if levels < 1:
        raise LayoutError(f"levels must be >= 1, got {levels}")
    if not adaptive:
        return (float(eb_user),) * levels
    return tuple(float(eb_user) / LEVEL_RATIO ** (levels - 1 - k) for k in range(levels))


def _round_half_away(q):
    return np.copysign(np.floor(np.abs(q) + 0.5), q)


def quantize(diff: float, eb: float) -> int | None:
    """Quantize a single residual. Returns ``None`` when it must be stored as an outlier."""
    if not eb > 0:
        raise HierzipError(f"error bound must be positive, got {eb}")
    if not math.isfinite(diff):
        return None
    code = float(_round_half_away(diff / (2.0 * eb)))
    if abs(code) > RADIUS:
        return None
    return int(code)


def dequantize(code: int, eb: float) -> float:
    if code == SENTINEL:
        raise HierzipError("sentinel code has no value; consult the outlier list")
    if abs(code) > RADIUS:
        raise HierzipError(f"code {code} outside quantizer radius")
    return 2.0 * eb * code


@dataclass
class QuantizedStream:
    """Codes for one sub-block plus its verbatim outliers."""

    level: int
    parity: tuple[int, int, int]
    codes: np.ndarray  # int32, sub-block shape, C order
    outlier_index: np.ndarray  # int64 flat indices into codes
    outlier_values: np.ndarray  # original dtype
    eb: float

    @property
    def shape(self):
        return self.codes.shape


def reconstruct(pred: np.ndarray, codes: np.ndarray, eb: float, dtype) -> np.ndarray:
    """Values the decoder produces from predictions and codes (outliers not yet applied)."""
    step = np.where(codes == SENTINEL, 0, codes).astype(np.float64)
    return (pred + (2.0 * eb) * step).astype(dtype)


def apply_outliers(recon: np.ndarray, index: np.ndarray, values: np.ndarray) -> np.ndarray:
    if index.size:
        recon.reshape(-1)[index] = values
    return recon


def quantize_block(orig: np.ndarray, pred: np.ndarray, eb: float, *, level: int = 0, parity=(0, 0, 0)):
    """Quantize ``orig - pred`` elementwise.

    ``pred`` is float64; ``orig`` keeps its native dtype. A point becomes an
    outlier when its code exceeds :data:`RADIUS`, when the residual is not
    finite, or when the reconstruction rounded to the native dtype would break
    the bound. ``eb == 0`` is accepted and keeps only exact predictions.

    Returns
    -------
    stream : QuantizedStream
    recon : ndarray
        Decoder-identical reconstruction in ``orig.dtype``.
    """
    if eb < 0 or not math.isfinite(eb):
        raise HierzipError(f"error bound must be non-negative, got {eb}")
    diff = orig.astype(np.float64) - pred
    with np.errstate(invalid="ignore", over="ignore"):
        if eb > 0:
            q = _round_half_away(diff / (2.0 * eb))
        else:
            q = np.zeros_like(diff)
        ok = np.isfinite(q) & (np.abs(q) <= RADIUS)
        codes = np.where(ok, q, SENTINEL).astype(np.int32)
        recon = reconstruct(pred, codes, eb, orig.dtype)
        err = np.abs(orig.astype(np.float64) - recon.astype(np.float64))
        bad = ~(err <= eb)
    codes[bad] = SENTINEL
    flat = codes.reshape(-1)
    index = np.flatnonzero(flat == SENTINEL).astype(np.int64)
    values = orig.reshape(-1)[index].copy()
    apply_outliers(recon, index, values)
    stream = QuantizedStream(level, tuple(parity), codes, index, values, float(eb))
    return stream, recon
