"""
Darkness sweep: retrain on copies of a dataset rescaled by several exposure
ratios and compare the color balance and brightness of the enhanced renders.
"""

import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np

from ..config import write_resolved_config
from ..synthscene import read_dataset, rescale_dataset
from .config import CONFIG_NAME, RunConfig
from .inference import render_views
from .loop import Trainer

logger = logging.getLogger(__name__)


@dataclass
class SweepEntry:
    gamma: float
    channel_ratios: Tuple[float, float, float]
    brightness: float
    final_loss: float


def enhanced_statistics(images: Sequence[np.ndarray]) -> Tuple[Tuple[float, float, float], float]:
    """
    Color balance and brightness of a set of enhanced linear renders.

    Returns:
        (per-channel mean over the mean of all channels, overall mean)
    """
    pixels = np.concatenate([np.asarray(im).reshape(-1, 3) for im in images])
    means = pixels.mean(axis=0)
    level = float(means.mean())
    ratios = means / level if level > 0.0 else np.full(3, np.nan)
    return (float(ratios[0]), float(ratios[1]), float(ratios[2])), level


def ratio_spread(entries: Sequence[SweepEntry]) -> float:
    """Largest per-channel (max - min) / mean of the channel ratios across the sweep."""
    ratios = np.array([e.channel_ratios for e in entries])
    return float(np.max((ratios.max(axis=0) - ratios.min(axis=0)) / ratios.mean(axis=0)))


def exposure_sweep(
    data: Union[str, Path],
    out_dir: Union[str, Path],
    gammas: Sequence[float],
    run: RunConfig,
    progress: bool = True,
) -> List[SweepEntry]:
    """
    Rescale, retrain and render once per exposure ratio.

    Each ratio gets ``<out>/gamma_<g>/data`` (the rescaled dataset) and
    ``<out>/gamma_<g>/run`` (checkpoints and the loss log).
    A ``sweep.json`` summary is written to ``out_dir``.

    Args:
        data: Source dataset directory
        out_dir: Sweep output directory
        gammas: Exposure ratios to apply
        run: Run configuration used for every retraining

    Returns:
        One SweepEntry per ratio, in the order given
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    entries = []
    for gamma in gammas:
        if gamma <= 0.0:
            raise ValueError(f"exposure ratios must be positive, got {gamma}")
        stem = out / f"gamma_{gamma:g}"
        rescale_dataset(data, stem / "data", gamma)
        dataset = read_dataset(stem / "data")
        trainer = Trainer(dataset, run, stem / "run")
        write_resolved_config(stem / "run" / CONFIG_NAME, run.to_dict())
        history = trainer.run(progress=progress)
        indices = dataset.manifest.test_indices or dataset.manifest.train_indices
        renders = render_views(trainer.params, dataset.manifest, run, enhanced=True, indices=indices)
        ratios, brightness = enhanced_statistics([r.enhanced for r in renders])
        entry = SweepEntry(
            gamma=float(gamma),
            channel_ratios=ratios,
            brightness=brightness,
            final_loss=history[-1].total if history else float("nan"),
        )
        logger.info(
            "gamma %.3g: channel ratios %s, brightness %.4f",
            gamma, ", ".join(f"{r:.3f}" for r in ratios), brightness,
        )
        entries.append(entry)

    summary: Dict[str, object] = {
        "entries": [asdict(e) for e in entries],
        "channel_ratio_spread": ratio_spread(entries) if entries else 0.0,
        "target_mean": run.loss.target_mean,
    }
    with open(out / "sweep.json", "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    return entries
