"""Synthetic multi-view low-light datasets with exact ground truth."""

from .dataset import (
    DatasetManifest,
    Degradation,
    LowLightDataset,
    SynthesizeConfig,
    ViewRecord,
    degrade,
    read_dataset,
    render_ground_truth,
    rescale_dataset,
    resolve_scene,
    synthesize_dataset,
    write_dataset,
)
from .poses import generate_poses, intrinsics_for, is_rigid, look_at
from .presets import PRESETS, get_preset
from .scene import Primitive, SyntheticScene, build_scene, load_scene_spec

__all__ = [
    "DatasetManifest",
    "Degradation",
    "LowLightDataset",
    "PRESETS",
    "Primitive",
    "SynthesizeConfig",
    "SyntheticScene",
    "ViewRecord",
    "build_scene",
    "degrade",
    "generate_poses",
    "get_preset",
    "intrinsics_for",
    "is_rigid",
    "load_scene_spec",
    "look_at",
    "read_dataset",
    "render_ground_truth",
    "rescale_dataset",
    "resolve_scene",
    "synthesize_dataset",
    "write_dataset",
]
