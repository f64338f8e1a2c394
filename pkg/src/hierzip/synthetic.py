"""Deterministic synthetic test fields."""

from __future__ import annotations

import numpy as np

KINDS = ("constant", "ramp", "gaussians", "noise")


def _axes(shape):
    return np.meshgrid(*[np.linspace(0.0, 1.0, n) for n in shape], indexing="ij")


def constant(shape, value: float = 2.5, dtype=np.float32):
    return np.full(shape, value, dtype=dtype)


def ramp(shape, dtype=np.float32):
    z, y, x = _axes(shape)
    return (2.0 * x + 3.0 * y + 5.0 * z).astype(dtype)


def gaussians(shape, n: int = 5, seed: int = 0, dtype=np.float32):
    """Sum of ``n`` randomly placed isotropic Gaussian bumps."""
    rng = np.random.default_rng(seed)
    z, y, x = _axes(shape)
    out = np.zeros(shape)
    for _ in range(n):
        cz, cy, cx = rng.uniform(0.1, 0.9, 3)
        width = rng.uniform(0.08, 0.25)
        amp = rng.uniform(0.5, 2.0)
        out += amp * np.exp(-((z - cz) ** 2 + (y - cy) ** 2 + (x - cx) ** 2) / (2 * width**2))
    return out.astype(dtype)


def noise(shape, seed: int = 0, dtype=np.float32):
    return np.random.default_rng(seed).uniform(0.0, 1.0, shape).astype(dtype)


def make(kind: str, shape, seed: int = 0, dtype=np.float32):
    if kind == "constant":
        return constant(shape, dtype=dtype)
    if kind == "ramp":
        return ramp(shape, dtype=dtype)
    if kind == "gaussians":
        return gaussians(shape, seed=seed, dtype=dtype)
    if kind == "noise":
        return noise(shape, seed=seed, dtype=dtype)
    raise ValueError(f"unknown field kind {kind!r}; choose from {KINDS}")
