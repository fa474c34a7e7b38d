"""Core data model: layouts, attribute vectors, scene samples, splits."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ContractError
from .constants import DESK_ATTRIBUTE_NAMES, DESK_NUM_CLASSES


@dataclass
class SemanticLayout:
    """Per-pixel class-label map conditioning generation.

    ``labels`` is an (H, W) integer array with every value in
    ``[0, num_classes)``.
    """

    labels: np.ndarray
    num_classes: int = DESK_NUM_CLASSES

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 2 or labels.size == 0:
            raise ContractError(f"layout labels must be a non-empty 2-D array, got shape {labels.shape}")
        if not np.issubdtype(labels.dtype, np.integer):
            raise ContractError(f"layout labels must be integral, got dtype {labels.dtype}")
        if self.num_classes < 1:
            raise ContractError("num_classes must be positive")
        lo, hi = int(labels.min()), int(labels.max())
        if lo < 0 or hi >= self.num_classes:
            raise ContractError(
                f"layout labels must lie in [0, {self.num_classes}), found range [{lo}, {hi}]"
            )
        self.labels = labels.astype(np.int64, copy=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape  # type: ignore[return-value]

    def class_mask(self, label: int) -> np.ndarray:
        return self.labels == label


@dataclass
class AttributeVector:
    """Real-valued transient-attribute condition, every entry in [0, 1]."""

    values: np.ndarray
    names: tuple[str, ...] = DESK_ATTRIBUTE_NAMES

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).ravel()
        names = tuple(self.names)
        if values.shape[0] != len(names):
            raise ContractError(
                f"attribute vector has {values.shape[0]} values but {len(names)} names"
            )
        if values.size == 0:
            raise ContractError("attribute vector must be non-empty")
        if np.any(values < 0.0) or np.any(values > 1.0) or not np.all(np.isfinite(values)):
            raise ContractError("attribute values must all lie in [0, 1]")
        self.values = values
        self.names = names

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, name: str) -> float:
        return float(self.values[self.names.index(name)])

    def replace(self, **updates: float) -> "AttributeVector":
        """Return a copy with the named entries set to new values."""
        values = self.values.copy()
        for name, value in updates.items():
            values[self.names.index(name)] = value
        return AttributeVector(values, self.names)

    @classmethod
    def zeros(cls, names: tuple[str, ...] = DESK_ATTRIBUTE_NAMES) -> "AttributeVector":
        return cls(np.zeros(len(names)), names)

    @classmethod
    def from_mapping(
        cls, mapping: dict[str, float], names: tuple[str, ...] = DESK_ATTRIBUTE_NAMES
    ) -> "AttributeVector":
        unknown = set(mapping) - set(names)
        if unknown:
            raise ContractError(f"unknown attribute names: {sorted(unknown)}")
        values = np.array([mapping.get(n, 0.0) for n in names], dtype=np.float64)
        return cls(values, names)


@dataclass
class SceneSample:
    """(image, layout, attributes) triple; the dataset unit.

    ``image`` is (H, W, 3) float with channel values in [-1, 1] and shares
    its spatial size with ``layout``.
    """

    image: np.ndarray
    layout: SemanticLayout
    attributes: AttributeVector
    id: str

    def __post_init__(self):
        image = np.asarray(self.image, dtype=np.float32)
        if image.ndim != 3 or image.shape[2] != 3:
            raise ContractError(f"sample image must be (H, W, 3), got {image.shape}")
        if image.shape[:2] != self.layout.shape:
            raise ContractError(
                f"image shape {image.shape[:2]} does not match layout {self.layout.shape}"
            )
        if not np.all(np.isfinite(image)) or image.min() < -1.0 - 1e-6 or image.max() > 1.0 + 1e-6:
            raise ContractError("image channel values must lie in [-1, 1]")
        self.image = np.clip(image, -1.0, 1.0)


@dataclass
class DatasetSplit:
    """Disjoint train/test sample lists plus the manifest describing them."""

    train: list[SceneSample]
    test: list[SceneSample]
    manifest: dict = field(default_factory=dict)

    def __post_init__(self):
        train_ids = {s.id for s in self.train}
        test_ids = {s.id for s in self.test}
        overlap = train_ids & test_ids
        if overlap:
            raise ContractError(f"train/test splits overlap on ids: {sorted(overlap)[:5]}")

    @property
    def attribute_names(self) -> tuple[str, ...]:
        pool = self.train or self.test
        return pool[0].attributes.names

    @property
    def num_classes(self) -> int:
        pool = self.train or self.test
        return pool[0].layout.num_classes
