"""Region-matched stylization: distribute style statistics label by label."""

from __future__ import annotations

import logging

import numpy as np

from ..data.types import SemanticLayout
from ..errors import ContractError
from .stats import region_stats, wct_region

log = logging.getLogger(__name__)


def stylize(content_img: np.ndarray, style_img: np.ndarray,
            content_layout: SemanticLayout, style_layout: SemanticLayout,
            per_label: bool = True) -> np.ndarray:
    """Match each content region's color statistics to the same-label style region.

    Labels with no pixels in the style image fall back to the style image's
    global statistics; with ``per_label`` off (or no shared labels at all) a
    single global transform is applied. Output is clamped to [-1, 1].
    """
    if content_img.shape != style_img.shape:
        raise ContractError(f"content {content_img.shape} and style {style_img.shape} "
                            "images must share a shape")
    if content_img.shape[:2] != content_layout.shape:
        raise ContractError("content image and layout disagree on resolution")
    if style_img.shape[:2] != style_layout.shape:
        raise ContractError("style image and layout disagree on resolution")
    if content_layout.num_classes != style_layout.num_classes:
        raise ContractError("layouts use different label vocabularies")

    content = np.asarray(content_img, dtype=np.float64)
    style = np.asarray(style_img, dtype=np.float64)
    out = content.copy()
    global_style = region_stats(style)

    content_labels = set(np.unique(content_layout.labels).tolist())
    style_labels = set(np.unique(style_layout.labels).tolist())
    if not per_label or not (content_labels & style_labels):
        if per_label:
            log.warning("no shared labels between content and style; "
                        "falling back to a global transform")
        flat = content.reshape(-1, content.shape[-1])
        out = wct_region(flat, region_stats(content), global_style).reshape(content.shape)
        return np.clip(out, -1.0, 1.0)

    for label in sorted(content_labels):
        mask = content_layout.class_mask(label)
        c_stats = region_stats(content, mask)
        if label in style_labels:
            s_stats = region_stats(style, style_layout.class_mask(label))
        else:
            s_stats = global_style
        out[mask] = wct_region(content[mask], c_stats, s_stats)
    return np.clip(out, -1.0, 1.0)
