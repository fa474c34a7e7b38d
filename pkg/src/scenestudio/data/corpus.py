"""Procedural layout grammar and synthetic corpus construction."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import ContractError
from .constants import DESK_CLASS_NAMES, DESK_RESOLUTION
from .oracle import OracleRecipe, render_oracle
from .types import AttributeVector, DatasetSplit, SceneSample, SemanticLayout

_CLASS = {name: i for i, name in enumerate(DESK_CLASS_NAMES)}


def _draw_ellipse(labels: np.ndarray, cy: float, cx: float, ry: float, rx: float, value: int,
                  min_row: int | None = None) -> None:
    h, w = labels.shape
    yy, xx = np.ogrid[:h, :w]
    mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 <= 1.0
    if min_row is not None:
        mask &= yy >= min_row
    labels[mask] = value


def _draw_mountain(labels: np.ndarray, rng: np.random.Generator, horizon: int) -> None:
    h, w = labels.shape
    apex_y = int(rng.integers(max(1, horizon - int(0.3 * h)), max(2, horizon - 1)))
    base_y = int(rng.integers(horizon + int(0.05 * h), min(h - 1, horizon + int(0.25 * h)) + 1))
    cx = int(rng.integers(int(0.15 * w), int(0.85 * w)))
    half_base = int(rng.integers(int(0.12 * w), int(0.30 * w)))
    for row in range(apex_y, base_y + 1):
        frac = (row - apex_y) / max(1, base_y - apex_y)
        half = max(1, int(round(half_base * frac)))
        lo, hi = max(0, cx - half), min(w, cx + half + 1)
        labels[row, lo:hi] = _CLASS["mountain"]


def sample_layout(rng: np.random.Generator, resolution: int = DESK_RESOLUTION) -> SemanticLayout:
    """Sky band over ground, plus 0-3 blobs of tree/water/mountain/building.

    The horizon never drops below the vertical midpoint, so sky pixels only
    ever occupy the top half.
    """
    r = resolution
    labels = np.full((r, r), _CLASS["ground"], dtype=np.int64)
    horizon = int(rng.integers(int(0.3 * r), r // 2 + 1))
    labels[:horizon] = _CLASS["sky"]

    for _ in range(int(rng.integers(0, 4))):
        kind = rng.choice(["tree", "water", "mountain", "building"])
        if kind == "mountain":
            _draw_mountain(labels, rng, horizon)
        elif kind == "tree":
            cy = rng.uniform(horizon + 0.05 * r, 0.9 * r)
            cx = rng.uniform(0.1 * r, 0.9 * r)
            _draw_ellipse(labels, cy, cx, rng.uniform(0.07 * r, 0.16 * r),
                          rng.uniform(0.07 * r, 0.16 * r), _CLASS["tree"])
        elif kind == "water":
            cy = rng.uniform(horizon + 0.15 * r, 0.92 * r)
            cx = rng.uniform(0.2 * r, 0.8 * r)
            _draw_ellipse(labels, cy, cx, rng.uniform(0.05 * r, 0.10 * r),
                          rng.uniform(0.15 * r, 0.35 * r), _CLASS["water"],
                          min_row=horizon)
        else:
            width = int(rng.integers(int(0.08 * r), int(0.20 * r)))
            left = int(rng.integers(int(0.05 * r), int(0.9 * r) - width))
            top = int(rng.integers(max(1, horizon - int(0.15 * r)), horizon + int(0.1 * r) + 1))
            bottom = int(rng.integers(horizon + int(0.2 * r), int(0.95 * r)))
            labels[top:bottom, left : left + width] = _CLASS["building"]

    return SemanticLayout(labels, len(DESK_CLASS_NAMES))


def _make_samples(recipe: OracleRecipe, n: int, prefix: str, rng: np.random.Generator,
                  resolution: int) -> list[SceneSample]:
    samples = []
    n_attr = len(recipe.attribute_names)
    for i in range(n):
        layout = sample_layout(rng, resolution)
        attrs = AttributeVector(rng.uniform(0.0, 1.0, size=n_attr), recipe.attribute_names)
        render_seed = int(rng.integers(0, 2**31))
        image = render_oracle(layout, attrs, recipe, seed=render_seed)
        samples.append(SceneSample(image, layout, attrs, f"{prefix}_{i:05d}"))
    return samples


def build_synthetic_corpus(
    recipe: OracleRecipe,
    n_train: int,
    n_test: int,
    seed: int,
    resolution: int = DESK_RESOLUTION,
    out_dir: str | Path | None = None,
) -> DatasetSplit:
    """Sample a train/test corpus from the layout grammar and the oracle.

    Deterministic given ``seed``; when ``out_dir`` is set the dataset tree
    (images/, layouts/, attributes/, manifest.json) is written there.
    """
    if n_train <= 0 or n_test <= 0:
        raise ContractError("n_train and n_test must be positive")
    rng = np.random.default_rng(seed)
    train = _make_samples(recipe, n_train, "train", rng, resolution)
    test = _make_samples(recipe, n_test, "test", rng, resolution)
    manifest = {
        "format": "scenestudio-dataset-v1",
        "num_classes": len(DESK_CLASS_NAMES),
        "class_names": list(DESK_CLASS_NAMES),
        "attribute_names": list(recipe.attribute_names),
        "resolution": resolution,
        "seed": seed,
        "splits": {
            "train": [s.id for s in train],
            "test": [s.id for s in test],
        },
    }
    split = DatasetSplit(train, test, manifest)
    if out_dir is not None:
        from .io import save_dataset

        save_dataset(split, out_dir)
    return split
