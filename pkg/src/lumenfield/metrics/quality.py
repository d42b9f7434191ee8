"""
Full-reference image quality (PSNR, SSIM) and the response-recovery score.

Images are compared in the display domain: 8-bit renders against ground
truth sent through the same ``to_srgb`` path.
"""

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..config import get_thread_count
from ..errors import ShapeError

logger = logging.getLogger(__name__)

SSIM_WINDOW = 8
UINT8_PEAK = 255.0


def _same_shape(a: np.ndarray, b: np.ndarray, what: str) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"{what}: image shapes differ, {a.shape} vs {b.shape}")
    return a, b


def psnr(a: np.ndarray, b: np.ndarray, peak: float = UINT8_PEAK) -> float:
    """
    Peak signal-to-noise ratio in dB, 10 * log10(peak^2 / MSE).

    Returns:
        +inf for identical images
    """
    if peak <= 0.0:
        raise ValueError(f"peak must be positive, got {peak}")
    a, b = _same_shape(a, b, "psnr")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def _gray(image: np.ndarray) -> np.ndarray:
    if image.ndim == 3:
        return image.mean(axis=-1)
    if image.ndim == 2:
        return image
    raise ShapeError(f"ssim expects (H, W) or (H, W, C) images, got {image.shape}")


def ssim(
    a: np.ndarray,
    b: np.ndarray,
    peak: float = UINT8_PEAK,
    window: int = SSIM_WINDOW,
) -> float:
    """
    Mean structural similarity over every ``window`` x ``window`` placement.

    Color images are averaged over channels first. Local statistics use a
    uniform window with population (biased) variances; the stabilizers are
    c1 = (0.01 * peak)^2 and c2 = (0.03 * peak)^2.

    Args:
        a: First image
        b: Second image
        peak: Dynamic range of the pixel values
        window: Side of the square uniform window

    Returns:
        SSIM in [-1, 1]; 1.0 for identical images

    Raises:
        ShapeError: On mismatched shapes or images smaller than the window
    """
    a, b = _same_shape(a, b, "ssim")
    a, b = _gray(a), _gray(b)
    if a.shape[0] < window or a.shape[1] < window:
        raise ShapeError(f"ssim: image {a.shape} is smaller than the {window}x{window} window")
    c1 = (0.01 * peak) ** 2
    c2 = (0.03 * peak) ** 2

    wa = sliding_window_view(a, (window, window))
    wb = sliding_window_view(b, (window, window))
    mu_a = wa.mean(axis=(-2, -1))
    mu_b = wb.mean(axis=(-2, -1))
    var_a = wa.var(axis=(-2, -1))
    var_b = wb.var(axis=(-2, -1))
    cov = (wa * wb).mean(axis=(-2, -1)) - mu_a * mu_b

    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a ** 2 + mu_b ** 2 + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def channel_ratios(render: np.ndarray, reference: np.ndarray) -> Tuple[float, float, float]:
    """Per-channel mean of ``render`` over the mean of ``reference``."""
    render, reference = _same_shape(render, reference, "channel_ratios")
    r = render.reshape(-1, 3).mean(axis=0)
    g = reference.reshape(-1, 3).mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(g > 0.0, r / np.where(g > 0.0, g, 1.0), math.nan)
    return (float(ratios[0]), float(ratios[1]), float(ratios[2]))


def _unit_geometric_mean(values: np.ndarray, what: str) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if values.shape != (3,):
        raise ShapeError(f"{what} must have three channels, got {values.shape}")
    if np.any(values <= 0.0) or not np.all(np.isfinite(values)):
        raise ValueError(f"{what} must be positive and finite, got {values}")
    return values / np.exp(np.mean(np.log(values)))


def response_recovery_score(
    learned: Sequence[float], oracle: Sequence[float]
) -> Tuple[float, float, float]:
    """
    Per-channel relative error of a learned mean response against the
    oracle inverse degradation.

    Both triples are scaled to unit geometric mean first, so the global
    scale (absorbed by the exposure gain) does not count.

    Args:
        learned: Mean learned response (s_R, s_G, s_B)
        oracle: Inverse of the applied per-channel degradation

    Returns:
        |l_k - o_k| / o_k for each channel after normalization
    """
    l = _unit_geometric_mean(np.asarray(learned), "learned response")
    o = _unit_geometric_mean(np.asarray(oracle), "oracle response")
    err = np.abs(l - o) / o
    return (float(err[0]), float(err[1]), float(err[2]))


@dataclass
class ViewMetrics:
    index: int
    psnr_db: float
    ssim: float
    channel_ratios: Tuple[float, float, float]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "index": self.index,
            "psnr_db": _jsonable(self.psnr_db),
            "ssim": self.ssim,
            "channel_ratios": [_jsonable(v) for v in self.channel_ratios],
        }


@dataclass
class MetricReport:
    """Per-view metrics, their means and the optional response-recovery error."""

    views: List[ViewMetrics] = field(default_factory=list)
    response_error: Optional[Tuple[float, float, float]] = None
    learned_response: Optional[Tuple[float, float, float]] = None

    @property
    def mean_psnr(self) -> float:
        return float(np.mean([v.psnr_db for v in self.views])) if self.views else math.nan

    @property
    def mean_ssim(self) -> float:
        return float(np.mean([v.ssim for v in self.views])) if self.views else math.nan

    @property
    def mean_channel_ratios(self) -> Tuple[float, float, float]:
        if not self.views:
            return (math.nan, math.nan, math.nan)
        mean = np.mean([v.channel_ratios for v in self.views], axis=0)
        return (float(mean[0]), float(mean[1]), float(mean[2]))

    def to_dict(self) -> Dict[str, Any]:
        report: Dict[str, Any] = {
            "views": [v.to_dict() for v in self.views],
            "mean": {
                "psnr_db": _jsonable(self.mean_psnr),
                "ssim": _jsonable(self.mean_ssim),
                "channel_ratios": [_jsonable(v) for v in self.mean_channel_ratios],
            },
        }
        if self.response_error is not None:
            report["response_recovery"] = {
                "relative_error": list(self.response_error),
                "learned_response": list(self.learned_response or ()),
            }
        return report

    def write_json(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2)
        return path

    def format_table(self) -> str:
        """Human-readable summary table."""
        lines = [f"{'view':>6}  {'PSNR (dB)':>10}  {'SSIM':>7}  {'R/G/B mean ratio':>22}"]
        rows = [(str(v.index), v.psnr_db, v.ssim, v.channel_ratios) for v in self.views]
        rows.append(("mean", self.mean_psnr, self.mean_ssim, self.mean_channel_ratios))
        for label, p, s, ratios in rows:
            ratio_text = "/".join(f"{r:.3f}" for r in ratios)
            lines.append(f"{label:>6}  {p:>10.3f}  {s:>7.4f}  {ratio_text:>22}")
        if self.response_error is not None:
            err = ", ".join(f"{e:.2%}" for e in self.response_error)
            lines.append(f"response recovery error (R, G, B): {err}")
        return "\n".join(lines)


def _jsonable(value: float) -> Union[float, str]:
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if math.isnan(value):
        return "nan"
    return value


def evaluate_pair(index: int, render: np.ndarray, reference: np.ndarray) -> ViewMetrics:
    return ViewMetrics(
        index=index,
        psnr_db=psnr(render, reference),
        ssim=ssim(render, reference),
        channel_ratios=channel_ratios(render, reference),
    )


def evaluate_renders(
    renders: Mapping[int, np.ndarray],
    references: Mapping[int, np.ndarray],
    learned_response: Optional[Sequence[float]] = None,
    oracle_response: Optional[Sequence[float]] = None,
) -> MetricReport:
    """
    Score 8-bit renders against 8-bit references, view by view.

    Args:
        renders: View index to display-domain render
        references: View index to display-domain ground truth
        learned_response: Mean learned response over the rendered views
        oracle_response: Inverse degradation recorded in the manifest

    Returns:
        MetricReport with views in index order

    Raises:
        KeyError: If a render has no reference
    """
    missing = sorted(set(renders) - set(references))
    if missing:
        raise KeyError(f"no reference image for views {missing}")
    indices = sorted(renders)
    workers = min(get_thread_count(), max(len(indices), 1))
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix="Metrics") as pool:
        futures = [pool.submit(evaluate_pair, i, renders[i], references[i]) for i in indices]
        views = [f.result() for f in futures]

    report = MetricReport(views=views)
    if learned_response is not None and oracle_response is not None:
        report.response_error = response_recovery_score(learned_response, oracle_response)
        report.learned_response = tuple(float(v) for v in learned_response)  # type: ignore[assignment]
    logger.info(
        "evaluated %d views: mean PSNR %.3f dB, mean SSIM %.4f",
        len(views), report.mean_psnr, report.mean_ssim,
    )
    return report
