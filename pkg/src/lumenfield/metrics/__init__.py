"""Image quality metrics and response-recovery scoring."""

from .quality import (
    MetricReport,
    ViewMetrics,
    channel_ratios,
    evaluate_pair,
    evaluate_renders,
    psnr,
    response_recovery_score,
    ssim,
)

__all__ = [
    "MetricReport",
    "ViewMetrics",
    "channel_ratios",
    "evaluate_pair",
    "evaluate_renders",
    "psnr",
    "response_recovery_score",
    "ssim",
]
