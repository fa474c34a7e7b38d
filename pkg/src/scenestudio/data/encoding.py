"""Binary-plane encoding of label maps for network conditioning."""

from __future__ import annotations

import numpy as np

from ..errors import EncodingCapacityError
from .types import SemanticLayout


def encode_layout_binary(layout: SemanticLayout, bits: int = 8) -> np.ndarray:
    """Encode a label map into ``bits`` binary planes, most-significant first.

    Plane ``b`` at pixel ``p`` holds bit ``b`` of ``label(p)``; decoding the
    stack recovers the labels exactly.
    """
    if bits < 1:
        raise EncodingCapacityError("bits must be >= 1")
    labels = layout.labels
    if (1 << bits) < layout.num_classes:
        raise EncodingCapacityError(
            f"{bits} bits encode {1 << bits} labels but the layout declares {layout.num_classes}"
        )
    hi = int(labels.max())
    if hi >= (1 << bits):
        raise EncodingCapacityError(f"label {hi} does not fit in {bits} bits")
    shifts = np.arange(bits - 1, -1, -1)
    planes = (labels[..., None] >> shifts) & 1
    return planes.astype(np.float32)


def decode_layout_binary(planes: np.ndarray) -> np.ndarray:
    """Inverse of :func:`encode_layout_binary`; returns the integer label map."""
    planes = np.asarray(planes)
    bits = planes.shape[-1]
    weights = (1 << np.arange(bits - 1, -1, -1)).astype(np.int64)
    return np.tensordot(np.rint(planes).astype(np.int64), weights, axes=([-1], [0]))
