"""
Quadrature volume rendering of low-light color, restored color and the
integrated sensor response.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple, Union

import numpy as np

from ..autodiff import Tensor, concat, cumsum_exclusive, exp
from ..field import FieldParams, PointOutput, eval_points, restore_color
from .rays import RayBatch, RaySample, sample_stratified


@dataclass
class RenderOutput:
    """
    Per-ray composited quantities.

    color_low, color_restored and response are (R, 3); weights and
    transmittance are (R, N); acc is (R,). color_enhanced is filled in by
    :func:`enhance` and stays None until then.
    """

    color_low: Tensor
    color_restored: Tensor
    response: Tensor
    weights: Tensor
    transmittance: Tensor
    acc: Tensor
    color_enhanced: Optional[np.ndarray] = None

    def __len__(self) -> int:
        return int(self.color_low.shape[0])


def composite(points: PointOutput, sample: RaySample) -> RenderOutput:
    """
    Alpha-composite per-sample field values along each ray.

    alpha_i = 1 - exp(-sigma_i delta_i), T_i = prod_{j<i} (1 - alpha_j),
    w_i = T_i alpha_i. The restored color composites c_l * s per sample.

    Args:
        points: Field output for R * N samples in ray-major order
        sample: The quadrature points the field was evaluated at

    Returns:
        RenderOutput for the R rays

    Raises:
        ValueError: If any density is negative
    """
    n_rays, n_samples = sample.t_values.shape
    if np.any(points.sigma.data < 0.0):
        raise ValueError("negative density reached the compositor")

    sigma = points.sigma.reshape(n_rays, n_samples)
    tau = sigma * Tensor(sample.deltas)
    alpha = 1.0 - exp(-tau)
    transmittance = exp(-cumsum_exclusive(tau, axis=1))
    weights = transmittance * alpha

    w = weights.reshape(n_rays, n_samples, 1)
    c_l = points.c_l.reshape(n_rays, n_samples, 3)
    s = points.s.reshape(n_rays, n_samples, 3)
    return RenderOutput(
        color_low=(w * c_l).sum(axis=1),
        color_restored=(w * restore_color(c_l, s)).sum(axis=1),
        response=(w * s).sum(axis=1),
        weights=weights,
        transmittance=transmittance,
        acc=weights.sum(axis=1),
    )


def quadrature_weights(sigma: np.ndarray, deltas: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Plain-array compositing weights for fixed density fields.

    Returns:
        (weights, transmittance), both shaped like ``sigma``
    """
    if np.any(sigma < 0.0):
        raise ValueError("negative density reached the compositor")
    tau = sigma * deltas
    exclusive = np.concatenate(
        [np.zeros_like(tau[..., :1]), np.cumsum(tau, axis=-1)[..., :-1]], axis=-1
    )
    transmittance = np.exp(-exclusive)
    return transmittance * -np.expm1(-tau), transmittance


def enhance(
    out: Union[RenderOutput, np.ndarray, Tensor], alpha: float, clamp: bool = True
) -> np.ndarray:
    """
    Scale restored color by the exposure gain: C_e = alpha * C_s.

    Args:
        out: RenderOutput (uses color_restored) or a restored-color array
        alpha: Exposure gain (> 0)
        clamp: Clip to [0, 1] for image output; loss-side callers pass False

    Returns:
        Enhanced colors; also stored on ``out.color_enhanced`` for RenderOutput input
    """
    if alpha <= 0.0:
        raise ValueError(f"exposure gain must be positive, got {alpha}")
    if isinstance(out, RenderOutput):
        restored = out.color_restored.data
    elif isinstance(out, Tensor):
        restored = out.data
    else:
        restored = np.asarray(out, dtype=np.float64)
    enhanced = alpha * restored
    if clamp:
        enhanced = np.clip(enhanced, 0.0, 1.0)
    if isinstance(out, RenderOutput):
        out.color_enhanced = enhanced
    return enhanced


def render_rays(
    params: FieldParams,
    rays: RayBatch,
    n_samples: int,
    jitter: bool = False,
    rng: Optional[np.random.Generator] = None,
    chunk: Optional[int] = None,
) -> RenderOutput:
    """
    Sample, evaluate the field and composite.

    With ``chunk`` set the rays are processed in slices and the results are
    concatenated in ray order; use this for gradient-free image renders.
    """
    if chunk is None or len(rays) <= chunk:
        sample = sample_stratified(rays, n_samples, jitter, rng)
        points = eval_points(
            params,
            sample.points.reshape(-1, 3),
            sample.directions.reshape(-1, 3),
        )
        return composite(points, sample)

    parts: List[RenderOutput] = [
        render_rays(params, rays.subset(start, start + chunk), n_samples, jitter, rng)
        for start in range(0, len(rays), chunk)
    ]
    return RenderOutput(
        color_low=concat([p.color_low for p in parts], axis=0),
        color_restored=concat([p.color_restored for p in parts], axis=0),
        response=concat([p.response for p in parts], axis=0),
        weights=concat([p.weights for p in parts], axis=0),
        transmittance=concat([p.transmittance for p in parts], axis=0),
        acc=concat([p.acc for p in parts], axis=0),
    )
