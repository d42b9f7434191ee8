"""
Dataset generation command.

``synthesize`` renders a synthetic scene from orbiting cameras, degrades the
clean views into noisy low-light raws and writes the dataset directory.
"""

import argparse
import logging
from pathlib import Path
from typing import Any, Dict, Optional

from ..config import load_config_file
from ..errors import ConfigError
from ..synthscene import PRESETS, SynthesizeConfig, synthesize_dataset
from .command_system import Command, CommandRegistry, parse_size, parse_triple, positive_int

logger = logging.getLogger(__name__)


def resolve_synthesize_config(
    config_path: Optional[str] = None, overrides: Optional[Dict[str, Any]] = None
) -> SynthesizeConfig:
    """
    Layer config/synthesize.toml defaults, an optional file and flag overrides.

    Args:
        config_path: File with a ``[synthesize]`` table (TOML or JSON)
        overrides: Values from command-line flags; None entries are ignored

    Returns:
        The resolved SynthesizeConfig
    """
    values = SynthesizeConfig.from_config().to_dict()
    if config_path is not None:
        data = load_config_file(config_path)
        unknown = sorted(set(data) - {"synthesize"})
        if unknown:
            raise ConfigError(f"{config_path}: unknown config sections: {', '.join(unknown)}")
        values.update(data.get("synthesize", {}))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return SynthesizeConfig.from_dict(values)


def configure_synthesize(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--scene",
        help=f"preset ({', '.join(sorted(PRESETS))}) or a JSON/TOML scene file",
    )
    parser.add_argument("--out", required=True, type=Path, help="dataset directory to write")
    parser.add_argument("--views", type=positive_int, help="number of camera views")
    parser.add_argument("--size", type=parse_size, help="image size as WIDTHxHEIGHT")
    parser.add_argument("--dim", type=float, help="illumination scale in (0, 1]")
    parser.add_argument("--tint", type=parse_triple, help="per-channel color cast r,g,b")
    parser.add_argument("--beta", type=float, help="shot-noise scale")
    parser.add_argument("--delta", type=float, help="read-noise standard deviation")
    parser.add_argument("--seed", type=int, help="random seed")
    parser.add_argument("--config", help="file with a [synthesize] table")


def run_synthesize(args: argparse.Namespace) -> int:
    overrides: Dict[str, Any] = {
        "scene": args.scene,
        "views": args.views,
        "dim": args.dim,
        "tint": args.tint,
        "beta": args.beta,
        "delta": args.delta,
        "seed": args.seed,
    }
    if args.size is not None:
        overrides["width"], overrides["height"] = args.size
    cfg = resolve_synthesize_config(args.config, overrides)
    logger.info("resolved synthesize config: %s", cfg.to_dict())
    manifest = synthesize_dataset(cfg, args.out)
    print(
        f"wrote {manifest.n_views} views ({len(manifest.test_indices)} held out) "
        f"at {manifest.width}x{manifest.height} to {args.out}"
    )
    return 0


def register_dataset_commands(registry: CommandRegistry) -> None:
    """
    Register dataset commands with the command registry.

    Args:
        registry: CommandRegistry to register commands with
    """
    registry.register_command(
        Command(
            id="synthesize",
            name="Synthesize dataset",
            description="Render a synthetic scene and write noisy, tinted low-light raws with clean ground truth.",
            configure=configure_synthesize,
            action=run_synthesize,
            category="Data",
        )
    )
