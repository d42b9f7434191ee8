"""
Patch-structured ray batches.

The smoothness term compares adjacent rays, so a batch is a set of square
pixel patches, each cut from one training view. Rays are ordered
patch-major and row-major inside each patch.
"""

from typing import Optional, Sequence

import numpy as np

from ..render import RayBatch, camera_rays
from ..synthscene import DatasetManifest, LowLightDataset
from .config import TrainConfig


def sample_ray_patches(
    manifest: DatasetManifest,
    cfg: TrainConfig,
    rng: np.random.Generator,
    views: Optional[Sequence[int]] = None,
) -> RayBatch:
    """
    Draw ``batch_rays / patch_side^2`` random patches.

    Args:
        manifest: Dataset geometry
        cfg: Batch size and patch side
        rng: Generator; identical state gives an identical batch
        views: Candidate view indices (training views by default)

    Returns:
        RayBatch with ``patch_side`` set
    """
    side = cfg.patch_side
    if side > manifest.height or side > manifest.width:
        raise ValueError(f"{side}x{side} patches do not fit {manifest.width}x{manifest.height} images")
    candidates = np.asarray(manifest.train_indices if views is None else list(views), dtype=np.int64)
    if candidates.size == 0:
        raise ValueError("no views to sample patches from")

    count = cfg.patches_per_batch
    chosen = candidates[rng.integers(0, candidates.size, size=count)]
    tops = rng.integers(0, manifest.height - side + 1, size=count)
    lefts = rng.integers(0, manifest.width - side + 1, size=count)
    rows, cols = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    offsets = np.stack([rows.reshape(-1), cols.reshape(-1)], axis=-1)

    parts = []
    for view_index, top, left in zip(chosen, tops, lefts):
        record = manifest.views[int(view_index)]
        pixels = offsets + np.array([top, left])
        parts.append(
            camera_rays(
                record.pose_matrix,
                record.intrinsics,
                manifest.height,
                manifest.width,
                manifest.near,
                manifest.far,
                pixels=pixels,
                view_id=int(view_index),
            )
        )
    return RayBatch(
        origins=np.concatenate([p.origins for p in parts]),
        directions=np.concatenate([p.directions for p in parts]),
        near=np.concatenate([p.near for p in parts]),
        far=np.concatenate([p.far for p in parts]),
        pixel_coords=np.concatenate([p.pixel_coords for p in parts]),
        view_ids=np.concatenate([p.view_ids for p in parts]),
        patch_side=side,
    )


def gather_targets(dataset: LowLightDataset, batch: RayBatch) -> np.ndarray:
    """Observed linear colors under each ray of a batch, (R, 3)."""
    targets = np.empty((len(batch), 3))
    for view_index in np.unique(batch.view_ids):
        rows = batch.view_ids == view_index
        observed = dataset.observed(int(view_index))
        coords = batch.pixel_coords[rows]
        targets[rows] = observed[coords[:, 0], coords[:, 1]]
    return targets

