"""Iterative Grad-CAM refinement and mask selection for referring segmentation."""

from ._refcam import (
    bilinear_upsample,
    center_sigmoid,
    compose_gradcam,
    connected_components,
    iou,
    mean_over_tokens,
    parse_expression,
    rle_decode,
    rle_encode,
    run_cli,
    select_mask,
    threshold_drop_mask,
    write_fixtures,
)

__all__ = [
    "bilinear_upsample",
    "center_sigmoid",
    "compose_gradcam",
    "connected_components",
    "iou",
    "mean_over_tokens",
    "parse_expression",
    "rle_decode",
    "rle_encode",
    "run_cli",
    "select_mask",
    "threshold_drop_mask",
    "write_fixtures",
]
