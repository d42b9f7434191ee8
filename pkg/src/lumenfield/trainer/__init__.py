"""Optimization loop, run configuration and test-time rendering."""

from .batching import gather_targets, sample_ray_patches
from .config import (
    ABLATIONS,
    CONFIG_NAME,
    RunConfig,
    TrainConfig,
    load_checkpoint_config,
    load_run_config,
)
from .inference import RENDER_MODES, ViewRender, render_view, render_views, write_renders
from .loop import LOG_COLUMNS, LOG_NAME, Trainer, step_generator, train_step
from .optim import AdamOptimizer, adam_update, lr_schedule
from .sweep import SweepEntry, enhanced_statistics, exposure_sweep, ratio_spread

__all__ = [
    "ABLATIONS",
    "AdamOptimizer",
    "CONFIG_NAME",
    "LOG_COLUMNS",
    "LOG_NAME",
    "RENDER_MODES",
    "RunConfig",
    "SweepEntry",
    "TrainConfig",
    "Trainer",
    "ViewRender",
    "adam_update",
    "enhanced_statistics",
    "exposure_sweep",
    "gather_targets",
    "load_checkpoint_config",
    "load_run_config",
    "lr_schedule",
    "ratio_spread",
    "render_view",
    "render_views",
    "sample_ray_patches",
    "step_generator",
    "train_step",
    "write_renders",
]
