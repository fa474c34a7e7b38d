"""Cross bilateral filter: smooth a target image along edges of a guide image.

Weights combine a spatial Gaussian with a Gaussian in guide-color distance;
windows are truncated at the image border (the normalizer shrinks
accordingly, so no padding convention leaks into the result).
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import ContractError


def cross_bilateral(target: np.ndarray, guide: np.ndarray,
                    sigma_spatial: float, sigma_range: float) -> np.ndarray:
    if target.shape[:2] != guide.shape[:2]:
        raise ContractError("target and guide must share a spatial size")
    if sigma_spatial <= 0 or sigma_range <= 0:
        raise ContractError("bilateral sigmas must be positive")
    tgt = np.asarray(target, dtype=np.float64)
    gde = np.asarray(guide, dtype=np.float64)
    if tgt.ndim == 2:
        tgt = tgt[..., None]
    if gde.ndim == 2:
        gde = gde[..., None]
    h, w = tgt.shape[:2]
    radius = int(math.ceil(3.0 * sigma_spatial))
    acc = np.zeros_like(tgt)
    norm = np.zeros((h, w, 1))
    inv2ss = 1.0 / (2.0 * sigma_spatial * sigma_spatial)
    inv2sr = 1.0 / (2.0 * sigma_range * sigma_range)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            spatial = math.exp(-(dy * dy + dx * dx) * inv2ss)
            dst_y = slice(max(0, -dy), h - max(0, dy))
            dst_x = slice(max(0, -dx), w - max(0, dx))
            src_y = slice(max(0, dy), h + min(0, dy))
            src_x = slice(max(0, dx), w + min(0, dx))
            diff = gde[dst_y, dst_x] - gde[src_y, src_x]
            weight = spatial * np.exp(-np.sum(diff * diff, axis=-1, keepdims=True) * inv2sr)
            acc[dst_y, dst_x] += weight * tgt[src_y, src_x]
            norm[dst_y, dst_x] += weight
    out = acc / norm
    return out if target.ndim == 3 else out[..., 0]
