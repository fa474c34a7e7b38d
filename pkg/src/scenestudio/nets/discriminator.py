"""Match-aware discriminators: Siamese image/condition streams fused to one score.

Each discriminator scores (image, attributes, layout) triples in [0, 1]: high
for real, well-matched triples; low both for generated images and for real
images paired with the wrong conditions. Three copies operate on a resolution
pyramid (factors 1, 0.5, 0.25). All convolutions are stride-2 4x4 with
LeakyReLU(0.2); normalization is applied everywhere except each stream's
input layer. A trailing adaptive pool keeps the score head valid at any
operating resolution, so the same three discriminators serve both the coarse
and fine training phases. Inputs smaller than 32 px (possible only at desk
scale, where the smallest pyramid level can be 8 px) are zero-padded up to
32 px so every stride-2 stage and every normalized map keeps at least two
spatial elements; at full scale the smallest level is 128 px and the pad
never engages.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn
from torch.nn import functional as F

from ..data.encoding import encode_layout_binary
from ..data.preprocess import resize_nearest
from ..data.types import AttributeVector, SemanticLayout
from ..errors import ContractError
from .layers import init_parameters, instance_norm, replicate_attribute_map
from .specs import DiscriminatorSpec

_MIN_SIDE = 32


def _stream(in_ch: int, widths: tuple[int, ...], slope: float) -> nn.Sequential:
    layers: list[nn.Module] = [
        nn.Conv2d(in_ch, widths[0], 4, stride=2, padding=1),  # input layer: no norm
        nn.LeakyReLU(slope, inplace=True),
    ]
    prev = widths[0]
    for w in widths[1:]:
        layers += [nn.Conv2d(prev, w, 4, stride=2, padding=1),
                   instance_norm(w),
                   nn.LeakyReLU(slope, inplace=True)]
        prev = w
    return nn.Sequential(*layers)


class MatchAwareDiscriminator(nn.Module):
    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        w = spec.stream_widths
        self.image_stream = _stream(3, w, spec.leaky_slope)
        self.condition_stream = _stream(spec.condition_channels, w, spec.leaky_slope)
        self.fuse = nn.Sequential(
            nn.Conv2d(2 * w[-1], spec.fusion_width, 1, stride=1),
            instance_norm(spec.fusion_width),
            nn.LeakyReLU(spec.leaky_slope, inplace=True),
        )
        self.score_head = nn.Conv2d(spec.fusion_width, 1, 4, stride=1, padding=0)
        init_parameters(self, spec.init_std)

    def forward(self, image: torch.Tensor, attrs: torch.Tensor,
                layout_planes: torch.Tensor) -> torch.Tensor:
        if image.shape[-2:] != layout_planes.shape[-2:]:
            raise ContractError("image and layout planes must share a resolution")
        attr_map = replicate_attribute_map(attrs, image.shape[2], image.shape[3])
        condition = torch.cat([attr_map, layout_planes], dim=1)
        pad_h = max(0, _MIN_SIDE - image.shape[-2])
        pad_w = max(0, _MIN_SIDE - image.shape[-1])
        if pad_h or pad_w:
            image = F.pad(image, (0, pad_w, 0, pad_h))
            condition = F.pad(condition, (0, pad_w, 0, pad_h))
        fused = self.fuse(torch.cat([self.image_stream(image),
                                     self.condition_stream(condition)], dim=1))
        pooled = F.adaptive_avg_pool2d(fused, 4)
        return torch.sigmoid(self.score_head(pooled)).reshape(image.shape[0])


class DiscriminatorPyramid(nn.Module):
    """The three match-aware discriminators, one per pyramid level."""

    def __init__(self, spec: DiscriminatorSpec):
        super().__init__()
        self.spec = spec
        self.levels = nn.ModuleList(MatchAwareDiscriminator(spec) for _ in spec.scale_factors)

    def forward(self, images: list[torch.Tensor], attrs: torch.Tensor,
                planes: list[torch.Tensor]) -> list[torch.Tensor]:
        if len(images) != len(self.levels) or len(planes) != len(self.levels):
            raise ContractError(f"expected {len(self.levels)} pyramid levels")
        return [d(x, attrs, p) for d, x, p in zip(self.levels, images, planes)]


def image_pyramid(image: torch.Tensor, n_levels: int = 3) -> list[torch.Tensor]:
    """Mean-pooled pyramid of a batched image, factors 1, 1/2, 1/4, ..."""
    levels = [image]
    for _ in range(n_levels - 1):
        levels.append(F.avg_pool2d(levels[-1], 2))
    return levels


def layout_planes_pyramid(layout_batch: np.ndarray, bits: int, num_classes: int,
                          n_levels: int = 3) -> list[np.ndarray]:
    """Binary layout planes at each pyramid scale, labels downsampled nearest.

    ``layout_batch`` is (B, H, W) integer labels; each output level is float32
    (B, bits, H_k, W_k).
    """
    levels = []
    side = layout_batch.shape[1]
    for k in range(n_levels):
        sk = side >> k
        batch = []
        for labels in layout_batch:
            small = labels if sk == side else resize_nearest(labels, sk, sk)
            planes = encode_layout_binary(
                SemanticLayout(labels=small, num_classes=num_classes), bits=bits)
            batch.append(planes.transpose(2, 0, 1))
        levels.append(np.stack(batch).astype(np.float32))
    return levels


def forward_discriminator(disc: MatchAwareDiscriminator, image: np.ndarray,
                          attrs: AttributeVector, layout: SemanticLayout) -> float:
    """Single-sample convenience wrapper returning the scalar match score."""
    if image.shape[:2] != layout.shape:
        raise ContractError("image and layout resolutions differ")
    if len(attrs.values) != disc.spec.num_attributes:
        raise ContractError("attribute vector length does not match discriminator spec")
    device = next(disc.parameters()).device
    dtype = next(disc.parameters()).dtype
    img = torch.from_numpy(np.ascontiguousarray(image.transpose(2, 0, 1)))[None].to(device, dtype)
    planes = encode_layout_binary(layout, bits=disc.spec.layout_bits).transpose(2, 0, 1)
    planes_t = torch.from_numpy(np.ascontiguousarray(planes).astype(np.float32))[None].to(device, dtype)
    a = torch.from_numpy(attrs.values.astype(np.float32))[None].to(device, dtype)
    disc.eval()
    with torch.no_grad():
        score = disc(img, a, planes_t)
    return float(score[0])
