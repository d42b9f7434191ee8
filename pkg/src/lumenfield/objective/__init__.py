"""Training losses and the test-time exposure gain."""

from .losses import (
    LossBreakdown,
    LossConfig,
    auto_exposure_gain,
    chromatic_adaptation_loss,
    data_loss,
    gray_world_target,
    objective,
    smoothness_loss,
    to_patches,
    total_loss,
)

__all__ = [
    "LossBreakdown",
    "LossConfig",
    "auto_exposure_gain",
    "chromatic_adaptation_loss",
    "data_loss",
    "gray_world_target",
    "objective",
    "smoothness_loss",
    "to_patches",
    "total_loss",
]
