"""Per-region feature statistics and the whitening-coloring transform.

The transform maps feature vectors of a content region so their sample mean
and covariance become those of the matching style region: whiten with the
content eigensystem, recolor with the style eigensystem. All statistics use
the unbiased covariance estimator; eigenvalues are clamped at a small floor
before the inverse square root so rank-deficient regions stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError

EIGENVALUE_FLOOR = 1e-5


@dataclass
class RegionStats:
    mean: np.ndarray           # (C,)
    cov: np.ndarray            # (C, C)
    count: int
    _eig: tuple[np.ndarray, np.ndarray] | None = field(default=None, repr=False)

    @property
    def mean_only(self) -> bool:
        """Regions too small for a covariance get mean-shift treatment only."""
        return self.count < 2

    def eigensystem(self) -> tuple[np.ndarray, np.ndarray]:
        """Clamped eigenvalues and eigenvectors of the covariance (cached)."""
        if self._eig is None:
            values, vectors = np.linalg.eigh(self.cov)
            self._eig = (np.maximum(values, EIGENVALUE_FLOOR), vectors)
        return self._eig


def region_stats(features: np.ndarray, mask: np.ndarray | None = None) -> RegionStats:
    """Mean and unbiased covariance of the masked feature vectors.

    ``features`` is (H, W, C) or already-flat (N, C); ``mask`` selects pixels
    when given. A single-pixel region yields a zero covariance flagged for
    mean-only transfer.
    """
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim == 3:
        feats = feats[mask] if mask is not None else feats.reshape(-1, feats.shape[-1])
    elif mask is not None:
        feats = feats[mask]
    if feats.ndim != 2:
        raise ContractError(f"expected pixel-feature matrix, got shape {feats.shape}")
    n = feats.shape[0]
    if n == 0:
        raise ContractError("region is empty")
    mean = feats.mean(axis=0)
    if n < 2:
        cov = np.zeros((feats.shape[1], feats.shape[1]))
    else:
        centered = feats - mean
        cov = centered.T @ centered / (n - 1)
    return RegionStats(mean=mean, cov=cov, count=n)


def wct_region(content_feats: np.ndarray, content_stats: RegionStats,
               style_stats: RegionStats) -> np.ndarray:
    """Whiten content features, recolor with the style statistics.

    ``content_feats`` is (N, C). Degenerate statistics on either side reduce
    the transform to a pure mean shift.
    """
    feats = np.asarray(content_feats, dtype=np.float64)
    if feats.ndim != 2 or feats.shape[1] != content_stats.mean.shape[0]:
        raise ContractError("content features and statistics disagree on dimension")
    if content_stats.mean.shape != style_stats.mean.shape:
        raise ContractError("content and style statistics disagree on dimension")
    centered = feats - content_stats.mean
    if content_stats.mean_only or style_stats.mean_only:
        return centered + style_stats.mean
    c_values, c_vectors = content_stats.eigensystem()
    s_values, s_vectors = style_stats.eigensystem()
    whitened = (centered @ c_vectors) * (c_values ** -0.5) @ c_vectors.T
    colored = (whitened @ s_vectors) * (s_values ** 0.5) @ s_vectors.T
    return colored + style_stats.mean
