"""Small array ops shared by training and evaluation code."""

from __future__ import annotations

import numpy as np

from ..data.types import AttributeVector
from ..errors import ContractError


def replicate_attributes(attrs: AttributeVector | np.ndarray, height: int, width: int) -> np.ndarray:
    """Tile an attribute vector into an (height, width, A) map."""
    values = attrs.values if isinstance(attrs, AttributeVector) else np.asarray(attrs, dtype=np.float64)
    if values.ndim != 1:
        raise ContractError("attribute vector must be one-dimensional")
    return np.broadcast_to(values, (height, width, values.shape[0])).copy()


def mean_pool2(image: np.ndarray) -> np.ndarray:
    """2x2 mean pooling of an (H, W, C) array; H and W must be even."""
    h, w = image.shape[:2]
    if h % 2 or w % 2:
        raise ContractError("mean_pool2 needs even spatial dimensions")
    return image.reshape(h // 2, 2, w // 2, 2, -1).mean(axis=(1, 3)).reshape(
        h // 2, w // 2, *image.shape[2:])


def build_pyramid(image: np.ndarray, n_levels: int = 3) -> list[np.ndarray]:
    """Mean-pooled pyramid [full, 1/2, 1/4]; the full side must divide by 2^(n-1)."""
    if image.ndim != 3:
        raise ContractError("build_pyramid expects an (H, W, C) image")
    side = image.shape[0]
    if side % (1 << (n_levels - 1)):
        raise ContractError(f"side {side} is not divisible by {1 << (n_levels - 1)}")
    levels = [np.asarray(image, dtype=np.float32)]
    for _ in range(n_levels - 1):
        levels.append(mean_pool2(levels[-1]).astype(np.float32))
    return levels
