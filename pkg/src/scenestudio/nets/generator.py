"""Two-branch scene generator: a coarse half-resolution branch feeding a fine branch.

Both branches consume the same spatial input (noise channels stacked with the
binary-encoded layout at fine resolution). The coarse branch G1 first
downsamples that input by a factor of 2, encodes it, runs attribute-conditioned
residual blocks, and decodes back to a half-resolution image; its last feature
map (before the image head) is summed into the fine branch G2 after G2's own
shallow encoder, so the fine image inherits the coarse structure.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..data.encoding import encode_layout_binary
from ..data.types import AttributeVector, SemanticLayout
from ..errors import ContractError
from .layers import (AttributeResidualBlock, conv_in_relu, deconv_in_relu,
                     init_parameters, replicate_attribute_map)
from .specs import GeneratorSpec


def _nearest_downsample2(x: torch.Tensor) -> torch.Tensor:
    # keeps binary layout planes binary (no fractional mixing at label edges)
    return x[:, :, ::2, ::2]


class CoarseGenerator(nn.Module):
    """G1: input at fine resolution, image out at half resolution."""

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        w = spec.coarse_widths
        self.encode = nn.Sequential(
            conv_in_relu(spec.input_channels, w[0], 7, 1),
            conv_in_relu(w[0], w[1], 3, 2),
            conv_in_relu(w[1], w[2], 3, 2),
            conv_in_relu(w[2], w[3], 3, 2),
        )
        self.blocks = nn.ModuleList(
            AttributeResidualBlock(w[3], spec.num_attributes) for _ in range(spec.coarse_blocks)
        )
        self.decode = nn.Sequential(
            deconv_in_relu(w[3], w[2], 3),
            deconv_in_relu(w[2], w[1], 3),
            deconv_in_relu(w[1], w[0], 3),
        )
        # final layer: fractional-stride-free 7x7 head, tanh, no normalization
        self.to_image = nn.ConvTranspose2d(w[0], 3, 7, stride=1, padding=3)

    def forward(self, spatial_input: torch.Tensor, attrs: torch.Tensor):
        h = self.encode(_nearest_downsample2(spatial_input))
        attr_map = replicate_attribute_map(attrs, h.shape[2], h.shape[3])
        for block in self.blocks:
            h = block(h, attr_map)
        features = self.decode(h)
        return torch.tanh(self.to_image(features)), features


class FineGenerator(nn.Module):
    """G2: shallow encoder over the same input, fused with G1 features by addition."""

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        w = spec.fine_widths
        if w[1] != spec.coarse_widths[0]:
            raise ContractError("fine branch width must match coarse feature width for fusion")
        self.encode = nn.Sequential(
            conv_in_relu(spec.input_channels, w[0], 7, 1),
            conv_in_relu(w[0], w[1], 3, 2),
        )
        self.blocks = nn.ModuleList(
            AttributeResidualBlock(w[1], spec.num_attributes) for _ in range(spec.fine_blocks)
        )
        self.decode = deconv_in_relu(w[1], w[1], 3)
        self.to_image = nn.ConvTranspose2d(w[1], 3, 7, stride=1, padding=3)

    def forward(self, spatial_input: torch.Tensor, attrs: torch.Tensor,
                coarse_features: torch.Tensor) -> torch.Tensor:
        h = self.encode(spatial_input) + coarse_features
        attr_map = replicate_attribute_map(attrs, h.shape[2], h.shape[3])
        for block in self.blocks:
            h = block(h, attr_map)
        return torch.tanh(self.to_image(self.decode(h)))


class SceneGenerator(nn.Module):
    """Full generator; forward returns (coarse, fine) images in [-1, 1]."""

    def __init__(self, spec: GeneratorSpec):
        super().__init__()
        self.spec = spec
        self.coarse = CoarseGenerator(spec)
        self.fine = FineGenerator(spec)
        init_parameters(self, spec.init_std)

    def forward(self, noise: torch.Tensor, layout_planes: torch.Tensor,
                attrs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        spatial_input = torch.cat([noise, layout_planes], dim=1)
        coarse, features = self.coarse(spatial_input, attrs)
        fine = self.fine(spatial_input, attrs, features)
        return coarse, fine

    def forward_coarse(self, noise: torch.Tensor, layout_planes: torch.Tensor,
                       attrs: torch.Tensor) -> torch.Tensor:
        spatial_input = torch.cat([noise, layout_planes], dim=1)
        coarse, _ = self.coarse(spatial_input, attrs)
        return coarse


def layout_to_planes(layout: SemanticLayout, bits: int) -> np.ndarray:
    """Binary layout planes as a float32 (bits, H, W) channel-first array."""
    planes = encode_layout_binary(layout, bits=bits)  # (H, W, bits)
    return np.ascontiguousarray(planes.transpose(2, 0, 1)).astype(np.float32)


def sample_noise(rng: np.random.Generator, spec: GeneratorSpec,
                 resolution: int | None = None) -> np.ndarray:
    """Standard-normal noise map, (H, W, n_z) at the fine resolution."""
    side = spec.fine_resolution if resolution is None else resolution
    return rng.standard_normal((side, side, spec.noise_channels)).astype(np.float32)


def forward_generator(gen: SceneGenerator, z: np.ndarray, layout: SemanticLayout,
                      attrs: AttributeVector) -> tuple[np.ndarray, np.ndarray]:
    """Single-sample convenience wrapper: numpy in, numpy (coarse, fine) out."""
    spec = gen.spec
    if layout.shape != (spec.fine_resolution, spec.fine_resolution):
        raise ContractError(
            f"layout is {layout.shape}, generator expects "
            f"{(spec.fine_resolution, spec.fine_resolution)}")
    if z.shape != (spec.fine_resolution, spec.fine_resolution, spec.noise_channels):
        raise ContractError(f"noise map has shape {z.shape}, expected "
                            f"{(spec.fine_resolution, spec.fine_resolution, spec.noise_channels)}")
    if len(attrs.values) != spec.num_attributes:
        raise ContractError(f"attribute vector has {len(attrs.values)} entries, "
                            f"spec declares {spec.num_attributes}")
    device = next(gen.parameters()).device
    dtype = next(gen.parameters()).dtype
    noise = torch.from_numpy(np.ascontiguousarray(z.transpose(2, 0, 1)))[None].to(device, dtype)
    planes = torch.from_numpy(layout_to_planes(layout, spec.layout_bits))[None].to(device, dtype)
    a = torch.from_numpy(attrs.values.astype(np.float32))[None].to(device, dtype)
    gen.eval()
    with torch.no_grad():
        coarse, fine = gen(noise, planes, a)
    to_np = lambda t: t[0].permute(1, 2, 0).cpu().numpy().astype(np.float32)
    return to_np(coarse), to_np(fine)


def noise_response_by_class(gen: SceneGenerator, layout: SemanticLayout,
                            attrs: AttributeVector, n_draws: int = 100,
                            seed: int = 0) -> dict[int, float]:
    """Per-class mean pixel std across repeated noise draws at fixed (layout, attrs).

    Diagnostic for how much stochastic texture each semantic region carries.
    """
    rng = np.random.default_rng(seed)
    images = []
    for _ in range(n_draws):
        _, fine = forward_generator(gen, sample_noise(rng, gen.spec), layout, attrs)
        images.append(fine)
    stack = np.stack(images)                      # (n, H, W, 3)
    per_pixel_std = stack.std(axis=0).mean(axis=-1)   # (H, W)
    out = {}
    for label in np.unique(layout.labels):
        out[int(label)] = float(per_pixel_std[layout.labels == label].mean())
    return out
