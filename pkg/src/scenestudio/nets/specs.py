"""Computation-graph descriptions for the scene generator and discriminators."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass

from ..errors import ContractError


def _scaled(widths: tuple[int, ...], divisor: int) -> tuple[int, ...]:
    return tuple(max(1, w // divisor) for w in widths)


@dataclass(frozen=True)
class GeneratorSpec:
    """Coarse (G1) + fine (G2) generator plan.

    The fine branch outputs at ``fine_resolution``; the coarse branch at half
    that. Channel widths follow the reference plan (64-128-256-512 for the
    coarse convolutions, 32-64 for the fine ones) divided by
    ``scale_divisor`` for desk-scale configs.
    """

    fine_resolution: int = 512
    num_classes: int = 150
    num_attributes: int = 40
    layout_bits: int = 8
    noise_channels: int = 4
    scale_divisor: int = 1
    coarse_blocks: int = 5
    fine_blocks: int = 2
    init_std: float = 0.02

    def __post_init__(self):
        if self.fine_resolution % 16 != 0:
            raise ContractError("fine_resolution must be divisible by 16")
        if (1 << self.layout_bits) < self.num_classes:
            raise ContractError("layout_bits cannot encode num_classes labels")
        if self.noise_channels < 1 or self.num_attributes < 1:
            raise ContractError("noise_channels and num_attributes must be positive")

    @property
    def base_resolution(self) -> int:
        return self.fine_resolution // 2

    @property
    def input_channels(self) -> int:
        return self.noise_channels + self.layout_bits

    @property
    def coarse_widths(self) -> tuple[int, ...]:
        return _scaled((64, 128, 256, 512), self.scale_divisor)

    @property
    def fine_widths(self) -> tuple[int, ...]:
        return _scaled((32, 64), self.scale_divisor)

    @classmethod
    def desk(cls, fine_resolution: int = 128, num_classes: int = 6, num_attributes: int = 8,
             scale_divisor: int = 4, layout_bits: int = 4, noise_channels: int = 4) -> "GeneratorSpec":
        return cls(
            fine_resolution=fine_resolution,
            num_classes=num_classes,
            num_attributes=num_attributes,
            layout_bits=layout_bits,
            noise_channels=noise_channels,
            scale_divisor=scale_divisor,
        )

    @classmethod
    def full_scale(cls) -> "GeneratorSpec":
        return cls()


@dataclass(frozen=True)
class DiscriminatorSpec:
    """Match-aware multi-scale discriminator plan (D1, D2, D3).

    Each scale runs a Siamese pair of four stride-2 convolutions (image
    stream and condition stream), fused by channel concatenation, a 1x1
    convolution, and a 4x4 reduction to a single [0, 1] score.
    """

    num_attributes: int = 40
    layout_bits: int = 8
    scale_divisor: int = 1
    leaky_slope: float = 0.2
    scale_factors: tuple[float, ...] = (1.0, 0.5, 0.25)
    init_std: float = 0.02

    def __post_init__(self):
        if self.scale_factors != (1.0, 0.5, 0.25):
            raise ContractError("discriminator pyramid uses scale factors (1, 0.5, 0.25)")

    @property
    def stream_widths(self) -> tuple[int, ...]:
        return _scaled((64, 128, 256, 512), self.scale_divisor)

    @property
    def fusion_width(self) -> int:
        return _scaled((512,), self.scale_divisor)[0]

    @property
    def condition_channels(self) -> int:
        return self.num_attributes + self.layout_bits

    @classmethod
    def desk(cls, num_attributes: int = 8, layout_bits: int = 4,
             scale_divisor: int = 4) -> "DiscriminatorSpec":
        return cls(num_attributes=num_attributes, layout_bits=layout_bits,
                   scale_divisor=scale_divisor)


def spec_json(gen: GeneratorSpec, disc: DiscriminatorSpec) -> str:
    payload = {"generator": asdict(gen), "discriminator": asdict(disc)}
    return json.dumps(payload, sort_keys=True)


def spec_hash(gen: GeneratorSpec, disc: DiscriminatorSpec) -> str:
    return hashlib.sha256(spec_json(gen, disc).encode()).hexdigest()


def specs_from_json(payload: str) -> tuple[GeneratorSpec, DiscriminatorSpec]:
    data = json.loads(payload)
    gen = GeneratorSpec(**data["generator"])
    disc_kwargs = dict(data["discriminator"])
    disc_kwargs["scale_factors"] = tuple(disc_kwargs["scale_factors"])
    return gen, DiscriminatorSpec(**disc_kwargs)
