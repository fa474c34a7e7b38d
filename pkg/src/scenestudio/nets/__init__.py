from .checkpoint import (CheckpointBundle, checkpoint_file_hash, load_checkpoint,
                         restore_discriminators, restore_generator, save_checkpoint)
from .discriminator import (DiscriminatorPyramid, MatchAwareDiscriminator,
                            forward_discriminator, image_pyramid, layout_planes_pyramid)
from .generator import (SceneGenerator, forward_generator, layout_to_planes,
                        noise_response_by_class, sample_noise)
from .layers import AttributeResidualBlock, replicate_attribute_map
from .ops import build_pyramid, mean_pool2, replicate_attributes
from .specs import DiscriminatorSpec, GeneratorSpec, spec_hash, spec_json, specs_from_json

__all__ = [
    "AttributeResidualBlock",
    "CheckpointBundle",
    "DiscriminatorPyramid",
    "DiscriminatorSpec",
    "GeneratorSpec",
    "MatchAwareDiscriminator",
    "SceneGenerator",
    "build_pyramid",
    "checkpoint_file_hash",
    "forward_discriminator",
    "forward_generator",
    "image_pyramid",
    "layout_planes_pyramid",
    "layout_to_planes",
    "load_checkpoint",
    "mean_pool2",
    "noise_response_by_class",
    "replicate_attribute_map",
    "replicate_attributes",
    "restore_discriminators",
    "restore_generator",
    "sample_noise",
    "save_checkpoint",
    "spec_hash",
    "spec_json",
    "specs_from_json",
]
