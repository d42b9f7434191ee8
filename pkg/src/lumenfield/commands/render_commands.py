"""
Rendering and evaluation commands.

``render`` writes 8-bit images of a trained checkpoint plus a JSON summary
of the exposure gains and learned responses; ``eval`` scores rendered
images against the clean ground truth of a dataset.
"""

import argparse
import json
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np

from ..errors import DatasetError
from ..field import FieldParams
from ..metrics import evaluate_renders
from ..rawproc import demosaic_bilinear, read_image, scale_exposure, subtract_black_level, to_srgb, write_image
from ..synthscene import DatasetManifest, LowLightDataset, read_dataset
from ..trainer import RENDER_MODES, ViewRender, load_checkpoint_config, render_views, write_renders
from .command_system import Command, CommandRegistry

logger = logging.getLogger(__name__)

SUMMARY_NAME = "render_summary.json"
VIEW_SETS = ("test", "train", "all")
RENDER_FILE = re.compile(r"^(?P<mode>[a-z]+)_(?P<index>\d+)\.png$")


def select_views(manifest: DatasetManifest, which: str) -> List[int]:
    if which == "all":
        return list(range(manifest.n_views))
    chosen = manifest.indices(which)
    if not chosen:
        raise DatasetError(f"dataset has no {which} views")
    return chosen


def mean_learned_response(renders: List[ViewRender]) -> Optional[List[float]]:
    """Average of the per-view mean responses over views with coverage."""
    means = [m for m in (r.mean_response() for r in renders) if m is not None]
    if not means:
        return None
    return [float(v) for v in np.mean(means, axis=0)]


def view_summary(render: ViewRender) -> Dict[str, object]:
    mean = render.mean_response()
    return {
        "index": render.index,
        "alpha": render.alpha,
        "mean_response": None if mean is None else [float(v) for v in mean],
    }


def write_observations(
    dataset: LowLightDataset, indices: List[int], out_dir: Path, exposure_ratio: float
) -> None:
    """Write the observed raws, rescaled by ``exposure_ratio``, through the display path."""
    for i in indices:
        scaled = scale_exposure(subtract_black_level(dataset.raw(i)), exposure_ratio)
        observed = demosaic_bilinear(scaled)
        write_image(out_dir / f"observed_{i:03d}.png", to_srgb(observed))


def configure_render(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--ckpt", required=True, type=Path, help="checkpoint file")
    parser.add_argument("--data", required=True, type=Path, help="dataset directory")
    parser.add_argument("--out", required=True, type=Path, help="output directory")
    parser.add_argument("--mode", choices=RENDER_MODES, default="enhanced", help="what to render")
    parser.add_argument(
        "--exposure-ratio",
        type=float,
        default=1.0,
        help=(
            "rescale only the observed_*.png comparison images (default 1.0); "
            "renders and render_summary.json do not depend on it"
        ),
    )
    parser.add_argument("--views", choices=VIEW_SETS, default="test", help="views to render")
    parser.add_argument("--config", help="run configuration; defaults to config.toml beside the checkpoint")


def run_render(args: argparse.Namespace) -> int:
    if args.exposure_ratio <= 0.0:
        raise DatasetError(f"exposure ratio must be positive, got {args.exposure_ratio}")
    run = load_checkpoint_config(args.ckpt, args.config)
    logger.info("resolved run config: %s", run.to_dict())
    logger.info(
        "render settings: mode=%s views=%s exposure_ratio=%s out=%s",
        args.mode, args.views, args.exposure_ratio, args.out,
    )
    dataset = read_dataset(args.data)
    params = FieldParams.load(args.ckpt, run.field)
    indices = select_views(dataset.manifest, args.views)

    renders = render_views(params, dataset.manifest, run, enhanced=args.mode == "enhanced", indices=indices)
    written = write_renders(renders, args.out, args.mode)
    write_observations(dataset, indices, args.out, args.exposure_ratio)

    summary = {
        "mode": args.mode,
        "checkpoint": str(args.ckpt),
        "exposure_ratio": args.exposure_ratio,
        "views": [view_summary(r) for r in renders],
        "mean_response": mean_learned_response(renders),
    }
    with open(args.out / SUMMARY_NAME, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)
    print(f"wrote {len(written)} {args.mode} images to {args.out}")
    return 0


def load_renders(renders_dir: Path, mode: str) -> Dict[int, np.ndarray]:
    """8-bit renders of one mode keyed by view index."""
    if not renders_dir.is_dir():
        raise DatasetError(f"renders directory not found: {renders_dir}")
    found: Dict[int, np.ndarray] = {}
    for path in sorted(renders_dir.iterdir()):
        match = RENDER_FILE.match(path.name)
        if match and match["mode"] == mode:
            found[int(match["index"])] = read_image(path)
    if not found:
        raise DatasetError(f"no {mode} renders in {renders_dir}")
    return found


def load_references(gt_dir: Path, indices: List[int]) -> Dict[int, np.ndarray]:
    """Clean ground truth sent through the display path, keyed by view index."""
    references = {}
    for i in indices:
        path = gt_dir / f"view_{i:03d}.npy"
        if not path.exists():
            raise DatasetError(f"ground truth file not found: {path}")
        references[i] = to_srgb(np.load(path))
    return references


def configure_eval(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--renders", required=True, type=Path, help="directory written by render")
    parser.add_argument("--gt", required=True, type=Path, help="ground-truth directory (the dataset's gt/)")
    parser.add_argument("--manifest", required=True, type=Path, help="dataset manifest")
    parser.add_argument("--out", required=True, type=Path, help="JSON report path")
    parser.add_argument("--mode", choices=RENDER_MODES[:2], default="enhanced", help="renders to score")


def run_eval(args: argparse.Namespace) -> int:
    logger.info(
        "resolved eval settings: renders=%s gt=%s manifest=%s mode=%s out=%s",
        args.renders, args.gt, args.manifest, args.mode, args.out,
    )
    manifest = DatasetManifest.read(args.manifest)
    renders = load_renders(args.renders, args.mode)
    out_of_range = sorted(i for i in renders if not 0 <= i < manifest.n_views)
    if out_of_range:
        raise DatasetError(f"renders for views {out_of_range} are not in the manifest")
    references = load_references(args.gt, sorted(renders))

    learned = None
    summary_path = args.renders / SUMMARY_NAME
    if summary_path.exists():
        with open(summary_path, "r", encoding="utf-8") as f:
            learned = json.load(f).get("mean_response")
    else:
        logger.warning("no %s in %s, skipping response recovery", SUMMARY_NAME, args.renders)

    report = evaluate_renders(
        renders,
        references,
        learned_response=learned,
        oracle_response=manifest.degradation.oracle_response if learned is not None else None,
    )
    report.write_json(args.out)
    print(report.format_table())
    return 0


def register_render_commands(registry: CommandRegistry) -> None:
    """
    Register rendering and evaluation commands with the command registry.

    Args:
        registry: CommandRegistry to register commands with
    """
    registry.register_command(
        Command(
            id="render",
            name="Render a checkpoint",
            description="Render low-light, enhanced or response images of dataset views.",
            configure=configure_render,
            action=run_render,
            category="Rendering",
        )
    )
    registry.register_command(
        Command(
            id="eval",
            name="Evaluate renders",
            description="Score renders against clean ground truth with PSNR, SSIM and response recovery.",
            configure=configure_eval,
            action=run_eval,
            category="Rendering",
        )
    )
