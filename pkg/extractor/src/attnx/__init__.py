"""attnx: class-token attention extraction from a ViT-S/8 backbone with
stride-4 overlapping patches, exported in the ATTN interchange format."""

from .errors import ExtractorError, ImageUnreadable, WeightsUnavailable
from .extract import (
    ExtractorConfig,
    aligned_size,
    build_model,
    class_attention,
    extract,
    extract_heads,
    load_image_tensor,
    write_attn_file,
)
from .vit import VisionTransformer, feature_grid_dims

__version__ = "0.1.0"

__all__ = [
    "ExtractorConfig",
    "ExtractorError",
    "ImageUnreadable",
    "VisionTransformer",
    "WeightsUnavailable",
    "aligned_size",
    "build_model",
    "class_attention",
    "extract",
    "extract_heads",
    "feature_grid_dims",
    "load_image_tensor",
    "write_attn_file",
]
