"""Procedural scene oracle: renders (layout, attributes) into images with
known, measurable attribute effects.

Each :class:`AttributeRule` pairs a pixel transform with a declared scalar
statistic and a direction, so tests (and the evaluation harness) can verify
that raising an attribute moves its statistic monotonically.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ContractError, MissingPaletteError
from .constants import DESK_ATTRIBUTE_NAMES, DESK_CLASS_NAMES
from .types import AttributeVector, SemanticLayout

_LUMA = np.array([0.299, 0.587, 0.114])


def _region_mask(layout: SemanticLayout, labels: tuple[int, ...] | None) -> np.ndarray:
    if labels is None:
        return np.ones(layout.shape, dtype=bool)
    return np.isin(layout.labels, labels)


def _stat_mean_luminance(img: np.ndarray, mask: np.ndarray) -> float:
    return float((img[mask] @ _LUMA).mean())


def _stat_luminance_std(img: np.ndarray, mask: np.ndarray) -> float:
    return float((img[mask] @ _LUMA).std())


def _stat_mean_red(img: np.ndarray, mask: np.ndarray) -> float:
    return float(img[mask][:, 0].mean())


def _stat_channel_diff(a: int, b: int):
    def stat(img: np.ndarray, mask: np.ndarray) -> float:
        region = img[mask]
        return float(region[:, a].mean() - region[:, b].mean())

    return stat


STATISTICS = {
    "mean_luminance": _stat_mean_luminance,
    "luminance_std": _stat_luminance_std,
    "mean_red": _stat_mean_red,
    "red_minus_blue": _stat_channel_diff(0, 2),
    "red_minus_green": _stat_channel_diff(0, 1),
    "green_minus_red": _stat_channel_diff(1, 0),
}


@dataclass(frozen=True)
class AttributeRule:
    """One attribute's rendering transform plus its declared effect.

    kind:
      * ``blend``   -- lerp target-region pixels toward ``color``
      * ``flatten`` -- lerp the whole image toward gray ``color`` (contrast loss)
      * ``dim``     -- scale the whole image by ``1 - strength * value``
    """

    attribute: str
    kind: str
    strength: float
    color: tuple[float, float, float] | None = None
    target_labels: tuple[int, ...] | None = None
    statistic: str = "mean_luminance"
    stat_labels: tuple[int, ...] | None = None
    direction: int = 1

    def apply(self, image: np.ndarray, layout: SemanticLayout, value: float) -> None:
        """Apply the transform in place on a [0, 1] image."""
        t = self.strength * float(value)
        if t == 0.0:
            return
        if self.kind == "dim":
            image *= 1.0 - t
        elif self.kind == "flatten":
            image += t * (np.asarray(self.color) - image)
        elif self.kind == "blend":
            mask = _region_mask(layout, self.target_labels)
            image[mask] += t * (np.asarray(self.color) - image[mask])
        else:
            raise ContractError(f"unknown rule kind {self.kind!r}")

    def measure(self, image: np.ndarray, layout: SemanticLayout) -> float:
        """Evaluate the declared statistic on a [-1, 1] image."""
        img01 = (np.asarray(image, dtype=np.float64) + 1.0) / 2.0
        mask = _region_mask(layout, self.stat_labels)
        if not mask.any():
            raise ContractError(f"statistic region for {self.attribute!r} is empty")
        return STATISTICS[self.statistic](img01, mask)


@dataclass(frozen=True)
class OracleRecipe:
    """Deterministic rendering rules: base palette, texture, attribute rules."""

    palette: dict[int, tuple[float, float, float]]
    texture: dict[int, float]
    rules: tuple[AttributeRule, ...]
    attribute_names: tuple[str, ...]
    seed: int = 0

    def rule_for(self, attribute: str) -> AttributeRule:
        for rule in self.rules:
            if rule.attribute == attribute:
                return rule
        raise KeyError(attribute)


def desk_recipe(seed: int = 0) -> OracleRecipe:
    """Desk-scale recipe over the 6 desk classes and 8 desk attributes."""
    c = {name: i for i, name in enumerate(DESK_CLASS_NAMES)}
    palette = {
        c["sky"]: (0.45, 0.66, 0.95),
        c["ground"]: (0.33, 0.55, 0.22),
        c["tree"]: (0.13, 0.38, 0.12),
        c["water"]: (0.15, 0.42, 0.75),
        c["mountain"]: (0.52, 0.50, 0.52),
        c["building"]: (0.62, 0.52, 0.42),
    }
    texture = {
        c["sky"]: 0.015,
        c["ground"]: 0.045,
        c["tree"]: 0.06,
        c["water"]: 0.03,
        c["mountain"]: 0.045,
        c["building"]: 0.03,
    }
    sky, ground, tree = (c["sky"],), (c["ground"],), (c["tree"],)
    rules = (
        AttributeRule("sunset", "blend", 0.8, (0.95, 0.55, 0.30), sky,
                      "red_minus_blue", sky, +1),
        AttributeRule("clouds", "blend", 0.9, (0.88, 0.88, 0.90), sky,
                      "mean_red", sky, +1),
        AttributeRule("snow", "blend", 0.9, (0.92, 0.93, 0.97), ground,
                      "mean_luminance", ground, +1),
        AttributeRule("autumn", "blend", 0.85, (0.70, 0.38, 0.12), tree,
                      "red_minus_green", tree, +1),
        AttributeRule("lush", "blend", 0.6, (0.10, 0.55, 0.08), ground + tree,
                      "green_minus_red", ground + tree, +1),
        AttributeRule("dry", "blend", 0.8, (0.72, 0.62, 0.30), ground,
                      "red_minus_blue", ground, +1),
        AttributeRule("fog", "flatten", 0.7, (0.78, 0.78, 0.78), None,
                      "luminance_std", None, -1),
        AttributeRule("night", "dim", 0.85, None, None,
                      "mean_luminance", None, -1),
    )
    return OracleRecipe(palette, texture, rules, DESK_ATTRIBUTE_NAMES, seed)


def _texture_noise(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    """Band-limited noise: smooth low-frequency field plus fine grain."""
    import cv2

    coarse = rng.normal(size=(h // 8 + 2, w // 8 + 2, 3)).astype(np.float32)
    smooth = cv2.resize(coarse, (w, h), interpolation=cv2.INTER_LINEAR)
    fine = rng.normal(size=(h, w, 3)).astype(np.float32)
    return 0.7 * smooth + 0.3 * fine


def render_oracle(
    layout: SemanticLayout,
    attributes: AttributeVector,
    recipe: OracleRecipe,
    seed: int = 0,
) -> np.ndarray:
    """Render a [-1, 1] image. Deterministic given (inputs, seed)."""
    present = np.unique(layout.labels)
    missing = [int(l) for l in present if int(l) not in recipe.palette]
    if missing:
        raise MissingPaletteError(f"recipe palette has no entry for labels {missing}")
    if set(attributes.names) != set(recipe.attribute_names):
        raise ContractError("attribute names do not match the recipe")

    h, w = layout.shape
    image = np.zeros((h, w, 3), dtype=np.float64)
    amp = np.zeros((h, w, 1), dtype=np.float64)
    for label in present:
        mask = layout.labels == label
        image[mask] = recipe.palette[int(label)]
        amp[mask, 0] = recipe.texture.get(int(label), 0.03)

    rng = np.random.default_rng([recipe.seed, seed])
    image += amp * _texture_noise(rng, h, w)
    image = np.clip(image, 0.0, 1.0)

    for rule in recipe.rules:
        rule.apply(image, layout, attributes[rule.attribute])

    image = np.clip(image, 0.0, 1.0)
    return (image * 2.0 - 1.0).astype(np.float32)
