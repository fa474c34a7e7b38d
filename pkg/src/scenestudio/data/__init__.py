from .constants import (
    DESK_ATTRIBUTE_NAMES,
    DESK_CLASS_NAMES,
    DESK_NUM_ATTRIBUTES,
    DESK_NUM_CLASSES,
    DESK_RESOLUTION,
    TRANSIENT_ATTRIBUTE_NAMES,
)
from .corpus import build_synthetic_corpus, sample_layout
from .encoding import decode_layout_binary, encode_layout_binary
from .io import load_als18k, load_manifest, save_dataset
from .oracle import AttributeRule, OracleRecipe, desk_recipe, render_oracle
from .preprocess import preprocess, resize_nearest, to_unit_range
from .types import AttributeVector, DatasetSplit, SceneSample, SemanticLayout

__all__ = [
    "AttributeRule",
    "AttributeVector",
    "DatasetSplit",
    "DESK_ATTRIBUTE_NAMES",
    "DESK_CLASS_NAMES",
    "DESK_NUM_ATTRIBUTES",
    "DESK_NUM_CLASSES",
    "DESK_RESOLUTION",
    "OracleRecipe",
    "SceneSample",
    "SemanticLayout",
    "TRANSIENT_ATTRIBUTE_NAMES",
    "build_synthetic_corpus",
    "decode_layout_binary",
    "desk_recipe",
    "encode_layout_binary",
    "load_als18k",
    "load_manifest",
    "preprocess",
    "render_oracle",
    "resize_nearest",
    "sample_layout",
    "save_dataset",
    "to_unit_range",
]
