"""Ray generation, stratified sampling and volume rendering."""

from .rays import Ray, RayBatch, RaySample, camera_rays, sample_stratified
from .volume import RenderOutput, composite, enhance, quadrature_weights, render_rays

__all__ = [
    "Ray",
    "RayBatch",
    "RaySample",
    "RenderOutput",
    "camera_rays",
    "composite",
    "enhance",
    "quadrature_weights",
    "render_rays",
    "sample_stratified",
]
