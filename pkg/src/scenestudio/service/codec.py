"""Base64 PNG payloads for the HTTP API: images in [-1, 1], label maps."""

from __future__ import annotations

import base64
import binascii
import io

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..data.io import image_to_uint8, uint8_to_image
from ..errors import ContractError


def encode_image(image: np.ndarray) -> str:
    """(H, W, 3) float image in [-1, 1] to a base64 PNG string."""
    buffer = io.BytesIO()
    Image.fromarray(image_to_uint8(image), mode="RGB").save(buffer, format="PNG")
    return base64.b64encode(buffer.getvalue()).decode("ascii")


def decode_image(payload: str) -> np.ndarray:
    """Base64 PNG back to a (H, W, 3) float32 image in [-1, 1]."""
    return uint8_to_image(np.asarray(_open(payload).convert("RGB")))


def encode_labels(labels: np.ndarray) -> str:
    """(H, W) integer label map to a base64 grayscale PNG string."""
    labels = np.asarray(labels)
    if labels.max(initial=0) > 255:
        raise ContractError("label maps above 255 classes cannot be encoded as 8-bit PNG")
    buffer = io.BytesIO()
    Image.fromarray(labels.astype(np.uint8), mode="L").save(buffer, format="PNG")
    return base64.b64encode(buffer.getvalue()).decode("ascii")


def decode_labels(payload: str) -> np.ndarray:
    """Base64 grayscale PNG back to a (H, W) int64 label map."""
    return np.asarray(_open(payload).convert("L")).astype(np.int64)


def _open(payload: str) -> Image.Image:
    try:
        raw = base64.b64decode(payload, validate=True)
        image = Image.open(io.BytesIO(raw))
        image.load()
        return image
    except (binascii.Error, UnidentifiedImageError, OSError, ValueError) as exc:
        raise ContractError(f"payload is not a base64-encoded PNG: {exc}") from exc
