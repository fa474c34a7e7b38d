from .loop import LOG_COLUMNS, TrainConfig, Trainer
from .losses import (SCORE_EPS, discriminator_loss, generator_adversarial_loss,
                     generator_loss, perceptual_loss)
from .negatives import (RANK_SIDE, layout_distance, nearest_negative_indices,
                        random_negative_indices, sample_negative_attributes)
from .perceptual import (PerceptualConfig, SegmentationNet, pixel_accuracy,
                         train_segmentation)

__all__ = [
    "LOG_COLUMNS",
    "PerceptualConfig",
    "RANK_SIDE",
    "SCORE_EPS",
    "SegmentationNet",
    "TrainConfig",
    "Trainer",
    "discriminator_loss",
    "generator_adversarial_loss",
    "generator_loss",
    "layout_distance",
    "nearest_negative_indices",
    "perceptual_loss",
    "pixel_accuracy",
    "random_negative_indices",
    "sample_negative_attributes",
    "train_segmentation",
]
