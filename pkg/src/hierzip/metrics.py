"""Quality and size metrics for rate-distortion reporting."""

from __future__ import annotations

import math

import numpy as np

from .exceptions import HierzipError


def _pair(orig, recon):
    orig = np.asarray(orig)
    recon = np.asarray(recon)
    if orig.shape != recon.shape:
        raise HierzipError(f"shape mismatch: {orig.shape} vs {recon.shape}")
    return orig.astype(np.float64, copy=False), recon.astype(np.float64, copy=False)


def max_abs_err(orig, recon) -> float:
    orig, recon = _pair(orig, recon)
    if orig.size == 0:
        return 0.0
    return float(np.max(np.abs(orig - recon)))


def rmse(orig, recon) -> float:
    orig, recon = _pair(orig, recon)
    return math.sqrt(float(np.mean(np.square(orig - recon))))


def psnr(orig, recon) -> float:
    """``20 log10(value range / RMSE)`` in dB; ``inf`` for an exact reconstruction."""
    orig, recon = _pair(orig, recon)
    err = rmse(orig, recon)
    if err == 0:
        return math.inf
    span = float(orig.max() - orig.min())
    if span == 0:
        return -math.inf
    return 20.0 * math.log10(span / err)


def compression_ratio(orig_bytes: int, archive_bytes: int) -> float:
    if archive_bytes <= 0:
        raise HierzipError("archive size must be positive")
    return orig_bytes / archive_bytes


def bitrate(archive_bytes: int, n_points: int) -> float:
    """Bits per value."""
    if n_points <= 0:
        raise HierzipError("point count must be positive")
    return 8.0 * archive_bytes / n_points


def report(orig, recon, archive_bytes: int) -> dict:
    orig = np.asarray(orig)
    return {
        "psnr": psnr(orig, recon),
        "max_err": max_abs_err(orig, recon),
        "cr": compression_ratio(orig.nbytes, archive_bytes),
        "bits_per_value": bitrate(archive_bytes, orig.size),
    }


def format_report(values: dict) -> str:
    def fmt(v):
        if isinstance(v, float):
            return "inf" if v == math.inf else ("-inf" if v == -math.inf else f"{v:.6g}")
        return str(v)

    return "".join(f"{k}={fmt(v)}\n" for k, v in values.items())
