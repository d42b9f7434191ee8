"""
Test-time rendering: low-light renders, restored and auto-exposed
enhanced renders, and the integrated response map.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from ..autodiff import no_grad
from ..config import get_thread_count
from ..field import FieldParams
from ..objective import LossConfig, auto_exposure_gain
from ..rawproc import to_srgb, write_image
from ..render import camera_rays, enhance, render_rays
from ..synthscene import DatasetManifest
from .config import RunConfig

logger = logging.getLogger(__name__)

RENDER_MODES = ("lowlight", "enhanced", "response")
COVERAGE_THRESHOLD = 0.5


@dataclass
class ViewRender:
    """Linear-domain renders of one view; color arrays are (H, W, 3)."""

    index: int
    low: np.ndarray
    restored: np.ndarray
    enhanced: np.ndarray
    response: np.ndarray
    acc: np.ndarray
    alpha: float

    def image(self, mode: str) -> np.ndarray:
        """Linear image for ``mode`` (lowlight, enhanced or response)."""
        if mode == "lowlight":
            return self.low
        if mode == "enhanced":
            return self.enhanced
        if mode == "response":
            return self.response_map()
        raise ValueError(f"unknown render mode '{mode}', expected one of {RENDER_MODES}")

    def response_map(self) -> np.ndarray:
        """Per-pixel response S / acc, normalized to its maximum for display."""
        normalized = np.zeros_like(self.response)
        covered = self.acc > 0.0
        normalized[covered] = self.response[covered] / self.acc[covered, None]
        peak = float(normalized.max())
        return normalized / peak if peak > 0.0 else normalized

    def mean_response(self) -> Optional[np.ndarray]:
        """Mean S / acc over pixels with acc > 0.5; None when nothing is covered."""
        covered = self.acc > COVERAGE_THRESHOLD
        if not np.any(covered):
            return None
        return np.mean(self.response[covered] / self.acc[covered, None], axis=0)


def render_view(
    params: FieldParams,
    manifest: DatasetManifest,
    index: int,
    n_samples: int,
    loss_cfg: LossConfig,
    chunk: Optional[int] = None,
    alpha: Optional[float] = None,
) -> ViewRender:
    """
    Render one view without recording a tape.

    Args:
        params: Trained field weights
        manifest: Dataset geometry
        index: View index
        n_samples: Samples per ray (midpoints, no jitter)
        loss_cfg: Supplies the auto-exposure target and clamp
        chunk: Rays per field evaluation
        alpha: Fixed exposure gain; computed from the image when None

    Returns:
        ViewRender with low-light, restored and enhanced colors
    """
    record = manifest.views[index]
    rays = camera_rays(
        record.pose_matrix, record.intrinsics, manifest.height, manifest.width,
        manifest.near, manifest.far, view_id=index,
    )
    with no_grad():
        out = render_rays(params, rays, n_samples, jitter=False, chunk=chunk)
    shape = (manifest.height, manifest.width)
    restored = out.color_restored.data.reshape(shape + (3,))
    if alpha is None:
        alpha = auto_exposure_gain(restored, loss_cfg.target_mean, loss_cfg.alpha_max)
    return ViewRender(
        index=index,
        low=out.color_low.data.reshape(shape + (3,)),
        restored=restored,
        enhanced=enhance(restored, alpha),
        response=out.response.data.reshape(shape + (3,)),
        acc=out.acc.data.reshape(shape),
        alpha=alpha,
    )


def render_views(
    params: FieldParams,
    manifest: DatasetManifest,
    cfg: RunConfig,
    enhanced: bool = True,
    indices: Optional[Sequence[int]] = None,
    alpha: Optional[float] = None,
) -> List[ViewRender]:
    """
    Render views in parallel, returned in the order requested.

    ``enhanced`` only affects logging; every ViewRender carries both the
    low-light and the enhanced image.

    Args:
        params: Trained field weights
        manifest: Dataset geometry
        cfg: Run configuration (sample count, chunk size, exposure target)
        enhanced: Whether the caller is after enhanced output
        indices: Views to render; all views by default
        alpha: Fixed exposure gain; per-image auto exposure when None

    Returns:
        One ViewRender per requested view
    """
    chosen = list(range(manifest.n_views)) if indices is None else list(indices)
    workers = min(get_thread_count(), max(len(chosen), 1))
    logger.info(
        "rendering %d %s views with %d workers",
        len(chosen), "enhanced" if enhanced else "low-light", workers,
    )
    # the no-grad switch is process-wide, so hold it around the pool
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="Render") as pool:
        futures = [
            pool.submit(
                render_view, params, manifest, i, cfg.train.n_samples, cfg.loss,
                cfg.train.render_chunk, alpha,
            )
            for i in chosen
        ]
        return [f.result() for f in futures]


def write_renders(
    renders: Sequence[ViewRender], out_dir: Union[str, Path], mode: str
) -> List[Path]:
    """
    Write 8-bit images through the display path with unit white balance.

    Returns:
        Paths written, in render order
    """
    if mode not in RENDER_MODES:
        raise ValueError(f"unknown render mode '{mode}', expected one of {RENDER_MODES}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for render in renders:
        path = out / f"{mode}_{render.index:03d}.png"
        written.append(write_image(path, to_srgb(render.image(mode))))
    return written
