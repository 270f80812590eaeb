"""radprep: foreground-aware contrast enhancement and evaluation for
radiographs acquired under diverse conditions.

The core idea: segment the scanned organ from a per-pixel attention map
(percentile threshold + morphological cleanup + largest component), then
histogram-equalize using the foreground intensity distribution only,
producing 16-bit images with the background zeroed out. The package also
ships the classic baselines (global HE, CLAHE, naive 8-bit conversion),
a mask-stability harness for intensity perturbations, and a detection /
classification evaluation suite (box IoU matching, accuracy with Wald
CIs, ROC/AUC, sensitivity at fixed FPR).
"""

from .attention import AttentionProvider, FileProvider, SyntheticProvider
from .detect_eval import (
    Accuracy,
    Box,
    EvalReport,
    GroundTruthImage,
    GtBox,
    Match,
    PredBox,
    PredictionImage,
    RocPoint,
    auc,
    box_iou,
    detection_accuracy,
    evaluate,
    evaluate_records,
    image_score,
    load_ground_truth,
    load_predictions,
    match_detections,
    roc_curve,
    sensitivity_at_fpr,
    wald_ci,
)
from .enhance import (
    ClaheParams,
    clahe,
    enhance_pipeline,
    global_hist_equalize,
    masked_hist_equalize,
)
from .raster_io import (
    AttentionMap,
    ForegroundMask,
    Histogram,
    Radiograph,
    compute_histogram,
    load_image,
    naive_8bit,
    read_attn,
    write_attn,
    write_histogram_csv,
    write_image,
)
from .robustness import AugSpec, StabilityReport, augment, mask_iou, stability_report
from .roi_mask import (
    MaskParams,
    extract_roi,
    largest_component,
    morph_close,
    morph_open,
    percentile_threshold,
    resize_bilinear,
    write_mask,
)

__version__ = "0.1.0"

__all__ = [
    "Accuracy",
    "AttentionMap",
    "AttentionProvider",
    "AugSpec",
    "Box",
    "ClaheParams",
    "EvalReport",
    "FileProvider",
    "ForegroundMask",
    "GroundTruthImage",
    "GtBox",
    "Histogram",
    "MaskParams",
    "Match",
    "PredBox",
    "PredictionImage",
    "Radiograph",
    "RocPoint",
    "StabilityReport",
    "SyntheticProvider",
    "auc",
    "augment",
    "box_iou",
    "clahe",
    "compute_histogram",
    "detection_accuracy",
    "enhance_pipeline",
    "evaluate",
    "evaluate_records",
    "extract_roi",
    "global_hist_equalize",
    "image_score",
    "largest_component",
    "load_ground_truth",
    "load_image",
    "load_predictions",
    "mask_iou",
    "masked_hist_equalize",
    "match_detections",
    "morph_close",
    "morph_open",
    "naive_8bit",
    "percentile_threshold",
    "read_attn",
    "resize_bilinear",
    "roc_curve",
    "sensitivity_at_fpr",
    "stability_report",
    "wald_ci",
    "write_attn",
    "write_histogram_csv",
    "write_image",
    "write_mask",
]
