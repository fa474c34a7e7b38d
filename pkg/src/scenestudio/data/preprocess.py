"""Resize + center-crop preprocessing that keeps images and layouts aligned."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from .types import SemanticLayout


def _resize_bilinear(image: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    import cv2

    resized = cv2.resize(image.astype(np.float32), (new_w, new_h), interpolation=cv2.INTER_LINEAR)
    return resized


def resize_nearest(labels: np.ndarray, new_h: int, new_w: int) -> np.ndarray:
    """Nearest-neighbor label resampling; labels stay categorical."""
    h, w = labels.shape
    rows = np.minimum((np.floor((np.arange(new_h) + 0.5) * h / new_h)).astype(np.int64), h - 1)
    cols = np.minimum((np.floor((np.arange(new_w) + 0.5) * w / new_w)).astype(np.int64), w - 1)
    return labels[rows[:, None], cols]


def to_unit_range(image: np.ndarray) -> np.ndarray:
    """Map an image to [-1, 1] floats. uint8 inputs are rescaled from
    [0, 255]; float inputs are assumed to already be in [-1, 1] and are
    clipped (which makes preprocessing idempotent)."""
    if image.dtype == np.uint8:
        return image.astype(np.float32) / 127.5 - 1.0
    return np.clip(image.astype(np.float32), -1.0, 1.0)


def _center_crop(array: np.ndarray, size: int) -> np.ndarray:
    h, w = array.shape[:2]
    top = (h - size) // 2
    left = (w - size) // 2
    return array[top : top + size, left : left + size]


def preprocess(
    image: np.ndarray,
    layout: SemanticLayout,
    target: int = 512,
    pad_if_narrow: bool = False,
) -> tuple[np.ndarray, SemanticLayout]:
    """Resize height to ``target``, then center-crop to a ``target`` square.

    The image is resampled bilinearly and mapped to [-1, 1]; the layout is
    resampled with nearest-neighbor. When the resized width falls short of
    ``target``, the pair is edge-padded if ``pad_if_narrow`` else rejected.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ContractError(f"expected (H, W, 3) image, got {image.shape}")
    if image.shape[:2] != layout.shape:
        raise ContractError(f"image {image.shape[:2]} and layout {layout.shape} are misaligned")

    img = to_unit_range(image)
    labels = layout.labels
    h, w = img.shape[:2]
    if h != target:
        new_w = max(1, int(round(w * target / h)))
        img = _resize_bilinear(img, target, new_w)
        labels = resize_nearest(labels, target, new_w)
        w = new_w

    if w < target:
        if not pad_if_narrow:
            raise ContractError(
                f"width {w} after resize is below target {target}; pass pad_if_narrow=True to pad"
            )
        pad = target - w
        left, right = pad // 2, pad - pad // 2
        img = np.pad(img, ((0, 0), (left, right), (0, 0)), mode="edge")
        labels = np.pad(labels, ((0, 0), (left, right)), mode="edge")

    img = np.clip(_center_crop(img, target), -1.0, 1.0)
    labels = _center_crop(labels, target)
    return img, SemanticLayout(labels, layout.num_classes)
