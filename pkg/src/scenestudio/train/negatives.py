"""Negative-condition sampling for the match-aware discriminators.

The mismatch term pairs a real image with wrong conditions. Wrong attributes
are drawn uniformly from the attribute cube. Wrong layouts come either from a
uniformly random other sample or — the relevance-ranked variant — from the
*nearest* other layout, which yields hard negatives: scenes whose arrangement
is almost right, forcing the discriminator to attend to the conditioning
rather than to gross scene structure.

Layout distance is the fraction of disagreeing labels after nearest-neighbor
downsampling both maps to 16x16.
"""

from __future__ import annotations

import numpy as np

from ..data.preprocess import resize_nearest
from ..errors import NoNegativeAvailableError

RANK_SIDE = 16


def _ranking_maps(layout_batch: np.ndarray, side: int) -> np.ndarray:
    n = layout_batch.shape[0]
    if layout_batch.shape[1] == side and layout_batch.shape[2] == side:
        return layout_batch.reshape(n, -1)
    return np.stack([resize_nearest(lab, side, side) for lab in layout_batch]).reshape(n, -1)


def layout_distance(a: np.ndarray, b: np.ndarray, side: int = RANK_SIDE) -> float:
    """Fraction of disagreeing labels between two maps at the ranking resolution."""
    if a.shape != b.shape:
        raise ValueError(f"layouts have different shapes: {a.shape} vs {b.shape}")
    da = a if a.shape == (side, side) else resize_nearest(a, side, side)
    db = b if b.shape == (side, side) else resize_nearest(b, side, side)
    return float(np.mean(da != db))


def nearest_negative_indices(layout_batch: np.ndarray, side: int = RANK_SIDE) -> np.ndarray:
    """For each layout, the index of its nearest *other* layout (ties: lowest index).

    ``layout_batch`` is (N, H, W) integer labels; pairwise distances are computed
    on the downsampled maps in blocks to bound memory.
    """
    n = layout_batch.shape[0]
    if n < 2:
        raise NoNegativeAvailableError("need at least two layouts to mine negatives")
    maps = _ranking_maps(layout_batch, side)
    out = np.empty(n, dtype=np.int64)
    block = max(1, (1 << 24) // (maps.shape[1] * n))
    for start in range(0, n, block):
        stop = min(n, start + block)
        dist = (maps[start:stop, None, :] != maps[None, :, :]).mean(axis=2)
        for i in range(stop - start):
            dist[i, start + i] = np.inf
        out[start:stop] = dist.argmin(axis=1)  # argmin takes the first min: lowest index wins ties
    return out


def random_negative_indices(rng: np.random.Generator, n: int) -> np.ndarray:
    """A uniformly random other index for each of n anchors."""
    if n < 2:
        raise NoNegativeAvailableError("need at least two layouts to mine negatives")
    draws = rng.integers(0, n - 1, size=n)
    draws[draws >= np.arange(n)] += 1
    return draws


def sample_negative_attributes(rng: np.random.Generator, batch: int, dim: int) -> np.ndarray:
    """Uniform draws from [0, 1]^dim — independent of the true attributes."""
    return rng.uniform(0.0, 1.0, size=(batch, dim))
