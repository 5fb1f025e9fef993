"""Copy-move forgery detection from overlapping-block DCT features."""

from .block_dct import Block, BlockOrigin, DctBlock, dct2, extract_blocks, idct2
from .config import DetectorConfig
from .features import BlockRecord, FeatureMatrix, FeatureVector, block_features, build_feature_matrix
from .image_core import LumaPlane, RasterImage, load_image, rgb_to_luma, save_image, save_mask
from .matching import (
    CandidatePair,
    CandidateSet,
    DetectionMask,
    DetectionReport,
    ShiftHistogram,
    accumulate_shifts,
    confirm_regions,
    detect,
    find_candidates,
    lex_sort,
    render_mask,
)
from .metrics import GroundTruthMask, MetricsReport, compute_metrics
from .tamper import AttackOp, ForgerySpec, apply_forgery

__all__ = [
    "AttackOp",
    "Block",
    "BlockOrigin",
    "BlockRecord",
    "CandidatePair",
    "CandidateSet",
    "DctBlock",
    "DetectionMask",
    "DetectionReport",
    "DetectorConfig",
    "FeatureMatrix",
    "FeatureVector",
    "ForgerySpec",
    "GroundTruthMask",
    "LumaPlane",
    "MetricsReport",
    "RasterImage",
    "ShiftHistogram",
    "accumulate_shifts",
    "apply_forgery",
    "block_features",
    "build_feature_matrix",
    "compute_metrics",
    "confirm_regions",
    "dct2",
    "detect",
    "extract_blocks",
    "find_candidates",
    "idct2",
    "lex_sort",
    "load_image",
    "render_mask",
    "rgb_to_luma",
    "save_image",
    "save_mask",
]
