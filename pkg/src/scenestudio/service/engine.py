"""Pure compute behind the API: hallucinate, manipulate, attribute sweeps.

Everything here takes explicit arrays plus a frozen generator and returns
arrays; HTTP concerns (sessions, payload codecs, status codes) stay in the
app layer. Inference never mutates the generator, so concurrent calls on one
checkpoint are safe and return exactly the serial results.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from PIL import Image

from ..data.types import AttributeVector, SemanticLayout
from ..errors import ContractError
from ..nets.generator import SceneGenerator, forward_generator, sample_noise
from ..transfer.pipeline import PipelineResult, TransferConfig, transfer_pipeline


def preprocess_layout(labels: np.ndarray, resolution: int) -> np.ndarray:
    """Resize (shorter side, nearest neighbor) and center-crop to a square."""
    labels = np.asarray(labels)
    if labels.ndim != 2:
        raise ContractError(f"layout must be 2-D, got shape {labels.shape}")
    h, w = labels.shape
    scale = resolution / min(h, w)
    new_h, new_w = max(resolution, round(h * scale)), max(resolution, round(w * scale))
    if (new_h, new_w) != (h, w):
        resized = Image.fromarray(labels.astype(np.int32), mode="I").resize(
            (new_w, new_h), resample=Image.NEAREST)
        labels = np.asarray(resized).astype(np.int64)
    top = (labels.shape[0] - resolution) // 2
    left = (labels.shape[1] - resolution) // 2
    return labels[top:top + resolution, left:left + resolution]


def preprocess_image(image: np.ndarray, resolution: int) -> np.ndarray:
    """Bilinear resize (shorter side) and center-crop, staying in [-1, 1]."""
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ContractError(f"image must be (H, W, 3), got shape {image.shape}")
    h, w = image.shape[:2]
    scale = resolution / min(h, w)
    new_h, new_w = max(resolution, round(h * scale)), max(resolution, round(w * scale))
    if (new_h, new_w) != (h, w):
        channels = [Image.fromarray(image[..., c], mode="F").resize(
            (new_w, new_h), resample=Image.BILINEAR) for c in range(3)]
        image = np.stack([np.asarray(c) for c in channels], axis=-1)
    top = (image.shape[0] - resolution) // 2
    left = (image.shape[1] - resolution) // 2
    return np.clip(image[top:top + resolution, left:left + resolution], -1.0, 1.0)


def _conditioning(generator: SceneGenerator, labels: np.ndarray,
                  attributes: AttributeVector) -> SemanticLayout:
    spec = generator.spec
    if len(attributes) != spec.num_attributes:
        raise ContractError(
            f"attribute vector has {len(attributes)} entries, generator expects "
            f"{spec.num_attributes}")
    prepared = preprocess_layout(labels, spec.fine_resolution)
    num_classes = max(spec.num_classes, int(prepared.max()) + 1)
    if num_classes > 2 ** spec.layout_bits:
        raise ContractError(
            f"layout labels up to {int(prepared.max())} exceed the generator's "
            f"{spec.layout_bits}-bit label capacity")
    return SemanticLayout(prepared, num_classes=num_classes)


def hallucinate(generator: SceneGenerator, labels: np.ndarray,
                attributes: AttributeVector, seed: int = 0) -> np.ndarray:
    """Fine-scale generation for a layout + attribute condition; seed-deterministic."""
    layout = _conditioning(generator, labels, attributes)
    rng = np.random.default_rng(seed)
    z = sample_noise(rng, generator.spec)
    _, fine = forward_generator(generator, z, layout, attributes)
    return fine


def attribute_sweep(generator: SceneGenerator, labels: np.ndarray,
                    attributes: AttributeVector, name: str,
                    values: list[float], seed: int = 0) -> list[np.ndarray]:
    """The same scene rendered at several strengths of one attribute.

    Noise is drawn once from the seed, so the sweep isolates the attribute.
    """
    if name not in attributes.names:
        raise ContractError(f"unknown attribute {name!r}")
    if not values:
        raise ContractError("sweep needs at least one value")
    layout = _conditioning(generator, labels, attributes)
    z = sample_noise(np.random.default_rng(seed), generator.spec)
    images = []
    for value in values:
        stepped = attributes.replace(**{name: float(value)})
        _, fine = forward_generator(generator, z, layout, stepped)
        images.append(fine)
    return images


@dataclass
class ManipulationResult:
    final: np.ndarray
    hallucination: np.ndarray
    stages: dict[str, np.ndarray] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)


def manipulate(generator: SceneGenerator, image: np.ndarray, labels: np.ndarray,
               attributes: AttributeVector, seed: int = 0,
               config: TransferConfig = TransferConfig()) -> ManipulationResult:
    """Hallucinate the target look, then transfer it back onto the input.

    Image and layout are preprocessed to the generator's resolution
    independently, so an uploaded photo can pair with a stored layout.
    """
    image = np.asarray(image, dtype=np.float32)
    labels = np.asarray(labels)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ContractError(f"input image must be (H, W, 3), got {image.shape}")
    resolution = generator.spec.fine_resolution
    prepared_image = preprocess_image(image, resolution)
    layout = _conditioning(generator, labels, attributes)
    style = hallucinate(generator, labels, attributes, seed=seed)
    result: PipelineResult = transfer_pipeline(
        prepared_image, layout, style, layout, config)
    return ManipulationResult(
        final=result.final.astype(np.float32),
        hallucination=style,
        stages={k: v.astype(np.float32) for k, v in result.stages.items()},
        timings=dict(result.timings),
    )
