"""Dataset directory IO: images/, layouts/, attributes/, manifest.json."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import DatasetError
from .types import AttributeVector, DatasetSplit, SceneSample, SemanticLayout

log = logging.getLogger(__name__)


def image_to_uint8(image: np.ndarray) -> np.ndarray:
    """[-1, 1] float image to uint8."""
    return np.clip(np.round((np.asarray(image) + 1.0) * 127.5), 0, 255).astype(np.uint8)


def uint8_to_image(raw: np.ndarray) -> np.ndarray:
    """uint8 image back to [-1, 1] float32."""
    return raw.astype(np.float32) / 127.5 - 1.0


def save_image_png(image: np.ndarray, path: Path) -> None:
    Image.fromarray(image_to_uint8(image), mode="RGB").save(path)


def load_image_png(path: Path) -> np.ndarray:
    return uint8_to_image(np.asarray(Image.open(path).convert("RGB")))


def save_labels_png(labels: np.ndarray, path: Path) -> None:
    if labels.max() > 255:
        raise DatasetError("label maps above 255 classes cannot be stored as 8-bit PNG")
    Image.fromarray(labels.astype(np.uint8), mode="L").save(path)


def load_labels_png(path: Path) -> np.ndarray:
    return np.asarray(Image.open(path).convert("L")).astype(np.int64)


def save_dataset(split: DatasetSplit, root: str | Path) -> None:
    root = Path(root)
    for sub in ("images", "layouts", "attributes"):
        (root / sub).mkdir(parents=True, exist_ok=True)
    for sample in list(split.train) + list(split.test):
        save_image_png(sample.image, root / "images" / f"{sample.id}.png")
        save_labels_png(sample.layout.labels, root / "layouts" / f"{sample.id}.png")
        with open(root / "attributes" / f"{sample.id}.json", "w") as f:
            json.dump({"values": sample.attributes.values.tolist()}, f)
    with open(root / "manifest.json", "w") as f:
        json.dump(split.manifest, f, indent=2, sort_keys=True)


def load_manifest(root: str | Path) -> dict:
    """Read and sanity-check a dataset manifest without touching samples."""
    path = Path(root) / "manifest.json"
    if not path.exists():
        raise DatasetError(f"no manifest.json under {root}")
    with open(path) as f:
        manifest = json.load(f)
    for key in ("num_classes", "attribute_names", "splits"):
        if key not in manifest:
            raise DatasetError(f"manifest is missing {key!r}")
    splits = manifest["splits"]
    if "train" not in splits or "test" not in splits:
        raise DatasetError("manifest splits must list 'train' and 'test'")
    overlap = set(splits["train"]) & set(splits["test"])
    if overlap:
        raise DatasetError(f"manifest splits overlap: {sorted(overlap)[:5]}")
    return manifest


def _load_sample(root: Path, sample_id: str, num_classes: int,
                 names: tuple[str, ...]) -> SceneSample:
    image = load_image_png(root / "images" / f"{sample_id}.png")
    labels = load_labels_png(root / "layouts" / f"{sample_id}.png")
    with open(root / "attributes" / f"{sample_id}.json") as f:
        payload = json.load(f)
    values = payload["values"] if isinstance(payload, dict) else payload
    return SceneSample(
        image=image,
        layout=SemanticLayout(labels, num_classes),
        attributes=AttributeVector(np.asarray(values, dtype=np.float64), names),
        id=sample_id,
    )


def load_als18k(root: str | Path) -> DatasetSplit:
    """Load an ALS18K-format dataset tree.

    Malformed samples are skipped with a logged reason; a split that ends up
    empty is fatal.
    """
    root = Path(root)
    manifest = load_manifest(root)
    num_classes = int(manifest["num_classes"])
    names = tuple(manifest["attribute_names"])

    loaded: dict[str, list[SceneSample]] = {}
    for split_name in ("train", "test"):
        samples = []
        for sample_id in manifest["splits"][split_name]:
            try:
                samples.append(_load_sample(root, sample_id, num_classes, names))
            except Exception as exc:  # noqa: BLE001 - per-sample isolation
                log.warning("skipping sample %s: %s", sample_id, exc)
        if not samples:
            raise DatasetError(f"{split_name} split is empty after validation")
        loaded[split_name] = samples
    return DatasetSplit(loaded["train"], loaded["test"], manifest)
