"""Input validation helpers shared by the estimator, codec and CLI."""

from __future__ import annotations

import numpy as np

from .exceptions import HierzipError, LayoutError

SUPPORTED_DTYPES = (np.dtype(np.float32), np.dtype(np.float64))


def check_field(X, *, min_dim: int = 1, copy: bool = False) -> np.ndarray:
    """Validate a 3D floating-point field and return it as a C-contiguous array.

    Parameters
    ----------
    X : array-like
        Candidate field with shape ``(nz, ny, nx)``.
    min_dim : int
        Smallest accepted extent along every axis.
    copy : bool
        Force a copy even when ``X`` is already suitable.
    """
    arr = np.asarray(X)
    if arr.ndim != 3:
        raise HierzipError(f"expected a 3D field, got an array with {arr.ndim} dimension(s)")
    if arr.dtype not in SUPPORTED_DTYPES:
        raise HierzipError(f"unsupported dtype {arr.dtype}; use float32 or float64")
    if min(arr.shape) < 1:
        raise HierzipError(f"field has an empty axis: shape {arr.shape}")
    if min(arr.shape) < min_dim:
        raise LayoutError(f"every dimension must be >= {min_dim}, got {arr.shape}")
    if copy:
        return np.array(arr, order="C", copy=True)
    return np.ascontiguousarray(arr)


def check_dims(dims) -> tuple[int, int, int]:
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3:
        raise HierzipError(f"dims must have three entries (nz, ny, nx), got {dims}")
    if min(dims) < 1:
        raise HierzipError(f"dims must be positive, got {dims}")
    return dims


def check_dtype(dtype) -> np.dtype:
    dt = np.dtype(dtype)
    if dt not in SUPPORTED_DTYPES:
        raise HierzipError(f"unsupported dtype {dt}; use float32 or float64")
    return dt
