"""scikit-learn style wrapper around the codec."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_field
from .codec import compress, decompress_full, decompress_to_level
from .container import CompressedArchive
from .metrics import psnr
from .random_access import decompress_box, decompress_slice


class HierarchicalCompressor(TransformerMixin, BaseEstimator):
    """Error-bounded lossy compressor with progressive and random-access decoding.

    ``fit`` compresses a 3D field and keeps the archive; ``transform`` returns
    the lossy reconstruction of a field at the absolute error bound learned
    during ``fit`` (so a relative bound is resolved once, on the training
    field).

    Parameters
    ----------
    eb : float
        Error bound; relative to the value range unless ``eb_mode='abs'``.
    eb_mode : {'rel', 'abs'}
    levels : {2, 3}
    quality : {'direct', 'linear', 'cubic'}
    adaptive : bool
        Use the tighter bounds on coarser levels.
    n_threads : int

    Attributes
    ----------
    archive_ : CompressedArchive
    eb_abs_ : float
    compression_ratio_ : float
    """

    def __init__(self, eb=1e-3, eb_mode="rel", levels=3, quality="cubic", adaptive=True, n_threads=1):
        self.eb = eb
        self.eb_mode = eb_mode
        self.levels = levels
        self.quality = quality
        self.adaptive = adaptive
        self.n_threads = n_threads

    def _compress(self, X, eb, mode):
        return compress(
            X,
            eb,
            mode=mode,
            levels=self.levels,
            quality=self.quality,
            adaptive=self.adaptive,
            n_threads=self.n_threads,
        )

    def fit(self, X, y=None):
        X = check_field(X, min_dim=2)
        self.archive_ = self._compress(X, self.eb, self.eb_mode)
        self.eb_abs_ = self.archive_.header.eb_user
        self.dims_ = X.shape
        self.dtype_ = X.dtype
        self.compression_ratio_ = X.nbytes / self.archive_.nbytes
        return self

    def transform(self, X):
        check_is_fitted(self, "archive_")
        X = check_field(X, min_dim=2)
        if self.eb_abs_ > 0:
            archive = self._compress(X, self.eb_abs_, "abs")
        else:
            archive = self._compress(X, self.eb, self.eb_mode)
        return decompress_full(archive, n_threads=self.n_threads)

    def fit_transform(self, X, y=None, **fit_params):
        return self.fit(X).decompress()

    def score(self, X, y=None) -> float:
        """PSNR of the reconstruction of ``X`` in dB."""
        return psnr(X, self.transform(X))

    def to_bytes(self) -> bytes:
        check_is_fitted(self, "archive_")
        return self.archive_.to_bytes()

    def decompress(self, level: int | None = None) -> np.ndarray:
        check_is_fitted(self, "archive_")
        if level is None:
            return decompress_full(self.archive_, n_threads=self.n_threads)
        return decompress_to_level(self.archive_, level, n_threads=self.n_threads)

    def decompress_box(self, roi) -> np.ndarray:
        check_is_fitted(self, "archive_")
        return decompress_box(self.archive_, roi, n_threads=self.n_threads)

    def decompress_slice(self, axis, index: int) -> np.ndarray:
        check_is_fitted(self, "archive_")
        return decompress_slice(self.archive_, axis, index, n_threads=self.n_threads)

    @classmethod
    def from_bytes(cls, data: bytes) -> "HierarchicalCompressor":
        """Rebuild a fitted estimator from archive bytes."""
        archive = CompressedArchive.from_bytes(data)
        h = archive.header
        est = cls(
            eb=h.eb_requested,
            eb_mode="rel" if h.rel_mode else "abs",
            levels=h.levels,
            quality=h.quality,
            adaptive=h.adaptive,
        )
        est.archive_ = archive
        est.eb_abs_ = h.eb_user
        est.dims_ = h.dims
        est.dtype_ = np.dtype(h.dtype).newbyteorder("=")
        est.compression_ratio_ = np.prod(h.dims) * est.dtype_.itemsize / archive.nbytes
        return est
