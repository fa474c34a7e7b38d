"""Shared building blocks: normalized conv stacks and attribute-conditioned residual blocks."""

from __future__ import annotations

import torch
from torch import nn

_IN_EPS = 1e-9


def instance_norm(channels: int) -> nn.InstanceNorm2d:
    # affine=False so normalized activations keep zero mean / unit variance exactly
    return nn.InstanceNorm2d(channels, eps=_IN_EPS, affine=False, track_running_stats=False)


def conv_in_relu(in_ch: int, out_ch: int, kernel: int, stride: int) -> nn.Sequential:
    pad = kernel // 2
    return nn.Sequential(
        nn.Conv2d(in_ch, out_ch, kernel, stride=stride, padding=pad),
        instance_norm(out_ch),
        nn.ReLU(inplace=True),
    )


def deconv_in_relu(in_ch: int, out_ch: int, kernel: int) -> nn.Sequential:
    """Stride-1/2 fractional conv (spatial upsample by 2)."""
    pad = kernel // 2
    return nn.Sequential(
        nn.ConvTranspose2d(in_ch, out_ch, kernel, stride=2, padding=pad, output_padding=1),
        instance_norm(out_ch),
        nn.ReLU(inplace=True),
    )


class AttributeResidualBlock(nn.Module):
    """Residual block whose first convolution sees the attribute map.

    The replicated attribute map is concatenated on the channel axis before
    the first convolution only; the skip connection adds the un-concatenated
    input, so the block reduces to a plain residual block when attr_dim is 0.
    """

    def __init__(self, channels: int, attr_dim: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels + attr_dim, channels, 3, stride=1, padding=1)
        self.norm1 = instance_norm(channels)
        self.conv2 = nn.Conv2d(channels, channels, 3, stride=1, padding=1)
        self.norm2 = instance_norm(channels)

    def forward(self, x: torch.Tensor, attr_map: torch.Tensor) -> torch.Tensor:
        h = torch.relu(self.norm1(self.conv1(torch.cat([x, attr_map], dim=1))))
        h = self.norm2(self.conv2(h))
        return x + h


def init_parameters(module: nn.Module, std: float) -> None:
    """Draw conv weights from N(0, std^2); zero the biases."""
    for m in module.modules():
        if isinstance(m, (nn.Conv2d, nn.ConvTranspose2d)):
            nn.init.normal_(m.weight, mean=0.0, std=std)
            if m.bias is not None:
                nn.init.zeros_(m.bias)


def replicate_attribute_map(attrs: torch.Tensor, height: int, width: int) -> torch.Tensor:
    """Broadcast (B, A) attribute vectors to (B, A, height, width) feature maps."""
    if attrs.dim() != 2:
        raise ValueError(f"expected (batch, attrs) tensor, got shape {tuple(attrs.shape)}")
    return attrs[:, :, None, None].expand(-1, -1, height, width)
