"""Quantitative evaluation: IS, FID, attribute MSE, segmentation accuracy."""

from .harness import (MetricReport, evaluate_checkpoint, evaluate_images,
                      format_ablation_table, generate_images, write_report)
from .metrics import (attribute_mse, frechet_distance, inception_score,
                      segmentation_accuracy)
from .surrogates import (EmbedderConfig, RegressorConfig, SurrogateBundle,
                         SurrogateConfig, condition_labels, load_surrogates,
                         save_surrogates, train_attribute_regressor,
                         train_embedder, train_surrogates)

__all__ = [
    "MetricReport",
    "evaluate_checkpoint",
    "evaluate_images",
    "format_ablation_table",
    "generate_images",
    "write_report",
    "attribute_mse",
    "frechet_distance",
    "inception_score",
    "segmentation_accuracy",
    "EmbedderConfig",
    "RegressorConfig",
    "SurrogateBundle",
    "SurrogateConfig",
    "condition_labels",
    "load_surrogates",
    "save_surrogates",
    "train_attribute_regressor",
    "train_embedder",
    "train_surrogates",
]
