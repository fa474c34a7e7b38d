"""Frozen feature extractor for the generator's feature-matching term.

The extractor is a small encoder-decoder segmentation network trained on the
same corpus the generator learns from. Training gates on held-out pixel
accuracy — a feature space from a weak segmenter would make the matching term
meaningless, so falling short of the gate is an error, not a warning. After
the gate passes the weights are frozen; gradients still flow through to
generator samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..data.types import DatasetSplit
from ..errors import ContractError, TrainingDivergenceError
from ..nets.layers import conv_in_relu

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PerceptualConfig:
    epochs: int = 60
    lr: float = 1e-3
    batch_size: int = 16
    seed: int = 0
    min_accuracy: float = 0.85
    width: int = 16


class SegmentationNet(nn.Module):
    """Three stride-2 encoder stages, mirrored decoder, per-pixel class logits.

    ``features`` exposes the deepest encoder stage (1/8 resolution), which is
    what the feature-matching loss consumes.
    """

    def __init__(self, num_classes: int, width: int = 16):
        super().__init__()
        w = width
        self.encoder = nn.Sequential(
            conv_in_relu(3, w, 3, 2),
            conv_in_relu(w, 2 * w, 3, 2),
            conv_in_relu(2 * w, 4 * w, 3, 2),
        )
        self.decoder = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="nearest"),
            conv_in_relu(4 * w, 2 * w, 3, 1),
            nn.Upsample(scale_factor=2, mode="nearest"),
            conv_in_relu(2 * w, w, 3, 1),
            nn.Upsample(scale_factor=2, mode="nearest"),
            conv_in_relu(w, w, 3, 1),
        )
        self.head = nn.Conv2d(w, num_classes, 3, padding=1)

    def features(self, images: torch.Tensor) -> torch.Tensor:
        return self.encoder(images)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self.head(self.decoder(self.encoder(images)))


def _to_tensors(samples) -> tuple[torch.Tensor, torch.Tensor]:
    images = torch.from_numpy(np.stack([s.image.transpose(2, 0, 1) for s in samples]))
    labels = torch.from_numpy(np.stack([s.layout.labels for s in samples]))
    return images, labels


def pixel_accuracy(net: SegmentationNet, images: torch.Tensor, labels: torch.Tensor) -> float:
    net.eval()
    with torch.no_grad():
        pred = net(images).argmax(dim=1)
    return float((pred == labels).double().mean())


def train_segmentation(split: DatasetSplit, config: PerceptualConfig = PerceptualConfig(),
                       num_classes: int | None = None) -> tuple[SegmentationNet, float]:
    """Train the extractor on the split's train half, gate on its test half."""
    if not split.train or not split.test:
        raise ContractError("segmentation training needs non-empty train and test splits")
    num_classes = num_classes or split.num_classes
    torch.manual_seed(config.seed)
    net = SegmentationNet(num_classes, width=config.width)
    images, labels = _to_tensors(split.train)
    held_images, held_labels = _to_tensors(split.test)
    opt = torch.optim.Adam(net.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)
    n = images.shape[0]
    for epoch in range(config.epochs):
        net.train()
        perm = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = perm[start:start + config.batch_size]
            opt.zero_grad()
            logits = net(images[idx])
            loss = F.cross_entropy(logits, labels[idx])
            loss.backward()
            opt.step()
    accuracy = pixel_accuracy(net, held_images, held_labels)
    log.info("segmentation extractor held-out pixel accuracy: %.4f", accuracy)
    if accuracy < config.min_accuracy:
        raise TrainingDivergenceError(
            f"feature extractor reached only {accuracy:.3f} held-out pixel accuracy "
            f"(gate: {config.min_accuracy:.2f}); its features are not usable")
    for p in net.parameters():
        p.requires_grad_(False)
    net.eval()
    return net, accuracy
