"""Desk-scale surrogate networks standing in for third-party pretrained models.

Full-scale evaluation uses large pretrained classifiers for feature
embeddings, attribute prediction, and segmentation. At desk scale those are
replaced by three small networks trained on the synthetic corpus:

- a condition classifier (the feature embedder): predicts which weather
  regime an image was rendered under, derived by thresholding a few strong
  attributes; softmax rows feed the inception score, pooled features feed
  the Fréchet distance;
- an attribute regressor: recovers the full attribute vector;
- a segmenter: recovers the semantic layout (reused from the perceptual-loss
  feature extractor).

Each is gated on held-out performance so a silently broken surrogate cannot
produce plausible-looking metric tables.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from ..data.types import DatasetSplit
from ..errors import CheckpointError, ContractError, TrainingDivergenceError
from ..nets.layers import conv_in_relu
from ..train.perceptual import PerceptualConfig, SegmentationNet, train_segmentation

log = logging.getLogger(__name__)

DEFAULT_CONDITION_ATTRIBUTES = ("night", "clouds")
_BATCH = 64


@dataclass(frozen=True)
class EmbedderConfig:
    condition_attributes: tuple[str, ...] = DEFAULT_CONDITION_ATTRIBUTES
    epochs: int = 90
    lr: float = 5e-4
    weight_decay: float = 1e-4
    batch_size: int = 16
    seed: int = 0
    width: int = 16
    min_accuracy: float = 0.5


@dataclass(frozen=True)
class RegressorConfig:
    epochs: int = 40
    lr: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 16
    seed: int = 0
    width: int = 16
    max_mse: float = 0.065


@dataclass(frozen=True)
class SurrogateConfig:
    embedder: EmbedderConfig = EmbedderConfig()
    regressor: RegressorConfig = RegressorConfig()
    segmentation: PerceptualConfig = PerceptualConfig()


def condition_labels(attribute_rows: np.ndarray, names: tuple[str, ...],
                     condition_attributes: tuple[str, ...]) -> np.ndarray:
    """Bit-packed regime id from thresholding the chosen attributes at 0.5."""
    missing = [a for a in condition_attributes if a not in names]
    if missing:
        raise ContractError(f"condition attributes {missing} not in {names}")
    rows = np.atleast_2d(np.asarray(attribute_rows))
    labels = np.zeros(rows.shape[0], dtype=np.int64)
    for bit, attr in enumerate(condition_attributes):
        labels |= (rows[:, names.index(attr)] > 0.5).astype(np.int64) << bit
    return labels


def _conv_relu(in_ch: int, out_ch: int) -> nn.Sequential:
    return nn.Sequential(nn.Conv2d(in_ch, out_ch, 3, stride=2, padding=1),
                         nn.ReLU(inplace=True))


class _PooledTrunk(nn.Module):
    """Three stride-2 conv stages and global average pooling to a flat vector.

    ``normalized`` picks instance-normalized stages (better texture
    generalization for the condition classifier) or norm-free ones: attribute
    regression reads per-image global statistics (a dim night image, a
    flattened foggy one) that per-sample normalization would erase.
    """

    def __init__(self, width: int, normalized: bool):
        super().__init__()
        conv = (lambda i, o: conv_in_relu(i, o, 3, 2)) if normalized else _conv_relu
        self.stages = nn.Sequential(
            conv(3, width),
            conv(width, 2 * width),
            conv(2 * width, 4 * width),
        )
        self.out_features = 4 * width

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.stages(x).mean(dim=(2, 3))


class ConditionClassifier(nn.Module):
    def __init__(self, num_conditions: int, width: int = 16):
        super().__init__()
        self.trunk = _PooledTrunk(width, normalized=True)
        self.head = nn.Linear(self.trunk.out_features, num_conditions)
        self.num_conditions = num_conditions

    def features(self, x: torch.Tensor) -> torch.Tensor:
        return self.trunk(x)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.head(self.trunk(x))


class AttributeRegressor(nn.Module):
    """Attribute recovery needs coarse spatial context (snow lives on the
    ground, clouds in the sky), so the head flattens a 4x4 pooled map rather
    than a single global average."""

    def __init__(self, num_attributes: int, width: int = 16):
        super().__init__()
        self.trunk = _PooledTrunk(width, normalized=False)
        pooled = 4 * width * 16
        self.head = nn.Sequential(
            nn.Flatten(),
            nn.Linear(pooled, 8 * width),
            nn.ReLU(inplace=True),
            nn.Linear(8 * width, num_attributes),
        )
        self.num_attributes = num_attributes

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        grid = nn.functional.adaptive_avg_pool2d(self.trunk.stages(x), 4)
        return torch.sigmoid(self.head(grid))


def _image_batches(images) -> list[torch.Tensor]:
    stack = np.stack([np.asarray(im, dtype=np.float32).transpose(2, 0, 1) for im in images])
    tensor = torch.from_numpy(stack)
    return [tensor[i:i + _BATCH] for i in range(0, tensor.shape[0], _BATCH)]


def _split_tensors(split: DatasetSplit):
    def pack(samples):
        images = torch.from_numpy(
            np.stack([s.image.transpose(2, 0, 1) for s in samples]))
        attrs = np.stack([s.attributes.values for s in samples])
        return images, attrs
    return pack(split.train), pack(split.test)


def train_embedder(split: DatasetSplit,
                   config: EmbedderConfig = EmbedderConfig()) -> tuple[ConditionClassifier, float]:
    """Fit the condition classifier; gate on held-out accuracy and freeze."""
    (images, train_attrs), (held_images, held_attrs) = _split_tensors(split)
    names = split.attribute_names
    train_labels = torch.from_numpy(
        condition_labels(train_attrs, names, config.condition_attributes))
    held_labels = torch.from_numpy(
        condition_labels(held_attrs, names, config.condition_attributes))
    torch.manual_seed(config.seed)
    net = ConditionClassifier(2 ** len(config.condition_attributes), width=config.width)
    opt = torch.optim.Adam(net.parameters(), lr=config.lr,
                           weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed)
    n = images.shape[0]
    for _ in range(config.epochs):
        net.train()
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            opt.zero_grad()
            loss = nn.functional.cross_entropy(net(images[idx]), train_labels[idx])
            loss.backward()
            opt.step()
    net.eval()
    with torch.no_grad():
        accuracy = float((net(held_images).argmax(dim=1) == held_labels).double().mean())
    log.info("condition classifier held-out accuracy: %.4f", accuracy)
    if accuracy < config.min_accuracy:
        raise TrainingDivergenceError(
            f"condition classifier reached only {accuracy:.3f} held-out accuracy "
            f"(gate: {config.min_accuracy:.2f}); its embeddings are not usable")
    for p in net.parameters():
        p.requires_grad_(False)
    return net, accuracy


def train_attribute_regressor(split: DatasetSplit,
                              config: RegressorConfig = RegressorConfig()
                              ) -> tuple[AttributeRegressor, float]:
    """Fit the attribute regressor; gate on held-out MSE and freeze."""
    (images, train_attrs), (held_images, held_attrs) = _split_tensors(split)
    targets = torch.from_numpy(train_attrs.astype(np.float32))
    held_targets = torch.from_numpy(held_attrs.astype(np.float32))
    torch.manual_seed(config.seed)
    net = AttributeRegressor(targets.shape[1], width=config.width)
    opt = torch.optim.Adam(net.parameters(), lr=config.lr,
                           weight_decay=config.weight_decay)
    rng = np.random.default_rng(config.seed)
    n = images.shape[0]
    for _ in range(config.epochs):
        net.train()
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            opt.zero_grad()
            loss = nn.functional.mse_loss(net(images[idx]), targets[idx])
            loss.backward()
            opt.step()
    net.eval()
    with torch.no_grad():
        mse = float(((net(held_images) - held_targets) ** 2).double().mean())
    log.info("attribute regressor held-out MSE: %.5f", mse)
    if mse > config.max_mse:
        raise TrainingDivergenceError(
            f"attribute regressor reached only {mse:.4f} held-out MSE "
            f"(gate: {config.max_mse:.3f}); its predictions are not usable")
    for p in net.parameters():
        p.requires_grad_(False)
    return net, mse


class _RegressorAdapter:
    def __init__(self, net: AttributeRegressor):
        self._net = net

    def predict(self, images) -> np.ndarray:
        with torch.no_grad():
            parts = [self._net(batch).numpy() for batch in _image_batches(images)]
        return np.concatenate(parts, axis=0)


class _SegmenterAdapter:
    def __init__(self, net: SegmentationNet):
        self._net = net

    def predict(self, images) -> np.ndarray:
        with torch.no_grad():
            parts = [self._net(batch).argmax(dim=1).numpy() for batch in _image_batches(images)]
        return np.concatenate(parts, axis=0)


@dataclass
class SurrogateBundle:
    """The three frozen surrogates plus their held-out scores and provenance."""

    embedder: ConditionClassifier
    regressor: AttributeRegressor
    segmenter_net: SegmentationNet
    attribute_names: tuple[str, ...]
    num_classes: int
    condition_attributes: tuple[str, ...]
    scores: dict = field(default_factory=dict)

    def probabilities(self, images) -> np.ndarray:
        with torch.no_grad():
            parts = [torch.softmax(self.embedder(batch), dim=1).numpy()
                     for batch in _image_batches(images)]
        return np.concatenate(parts, axis=0)

    def features(self, images) -> np.ndarray:
        with torch.no_grad():
            parts = [self.embedder.features(batch).numpy()
                     for batch in _image_batches(images)]
        return np.concatenate(parts, axis=0)

    @property
    def attribute_predictor(self) -> _RegressorAdapter:
        return _RegressorAdapter(self.regressor)

    @property
    def segmenter(self) -> _SegmenterAdapter:
        return _SegmenterAdapter(self.segmenter_net)


def train_surrogates(split: DatasetSplit,
                     config: SurrogateConfig = SurrogateConfig()) -> SurrogateBundle:
    torch.set_num_threads(1)
    embedder, accuracy = train_embedder(split, config.embedder)
    regressor, mse = train_attribute_regressor(split, config.regressor)
    segmenter, seg_accuracy = train_segmentation(split, config.segmentation)
    return SurrogateBundle(
        embedder=embedder,
        regressor=regressor,
        segmenter_net=segmenter,
        attribute_names=split.attribute_names,
        num_classes=split.num_classes,
        condition_attributes=config.embedder.condition_attributes,
        scores={"embedder_accuracy": accuracy, "regressor_mse": mse,
                "segmenter_accuracy": seg_accuracy},
    )


def save_surrogates(bundle: SurrogateBundle, path: str | Path) -> Path:
    path = Path(path)
    arrays = {}
    for prefix, net in (("embedder", bundle.embedder), ("regressor", bundle.regressor),
                        ("segmenter", bundle.segmenter_net)):
        for key, value in net.state_dict().items():
            arrays[f"{prefix}.{key}"] = value.numpy()
    meta = {
        "format": 1,
        "attribute_names": list(bundle.attribute_names),
        "num_classes": bundle.num_classes,
        "condition_attributes": list(bundle.condition_attributes),
        "embedder_width": bundle.embedder.trunk.out_features // 4,
        "regressor_width": bundle.regressor.trunk.out_features // 4,
        "segmenter_width": bundle.segmenter_net.head.in_channels,
        "scores": bundle.scores,
    }
    arrays["meta"] = np.array(json.dumps(meta))
    path.parent.mkdir(parents=True, exist_ok=True)
    np.savez_compressed(path, **arrays)
    return path


def load_surrogates(path: str | Path) -> SurrogateBundle:
    path = Path(path)
    if not path.exists():
        raise CheckpointError(f"surrogate bundle not found: {path}")
    try:
        with np.load(path) as npz:
            arrays = {k: npz[k] for k in npz.files}
        meta = json.loads(str(arrays.pop("meta")))
    except (OSError, ValueError, KeyError) as exc:
        raise CheckpointError(f"surrogate bundle unreadable: {path}: {exc}") from exc
    if meta.get("format") != 1:
        raise CheckpointError(f"unsupported surrogate bundle format: {meta.get('format')}")
    condition_attributes = tuple(meta["condition_attributes"])
    embedder = ConditionClassifier(2 ** len(condition_attributes),
                                   width=meta["embedder_width"])
    regressor = AttributeRegressor(len(meta["attribute_names"]),
                                   width=meta["regressor_width"])
    segmenter = SegmentationNet(meta["num_classes"], width=meta["segmenter_width"])
    for prefix, net in (("embedder", embedder), ("regressor", regressor),
                        ("segmenter", segmenter)):
        state = {k[len(prefix) + 1:]: torch.from_numpy(v)
                 for k, v in arrays.items() if k.startswith(prefix + ".")}
        try:
            net.load_state_dict(state)
        except RuntimeError as exc:
            raise CheckpointError(f"surrogate bundle {prefix} weights unusable: {exc}") from exc
        net.eval()
        for p in net.parameters():
            p.requires_grad_(False)
    return SurrogateBundle(
        embedder=embedder,
        regressor=regressor,
        segmenter_net=segmenter,
        attribute_names=tuple(meta["attribute_names"]),
        num_classes=meta["num_classes"],
        condition_attributes=condition_attributes,
        scores=dict(meta.get("scores", {})),
    )
