"""
Training commands: ``train`` (with resume and ablations) and the ``sweep``
over exposure ratios.
"""

import argparse
import logging
from pathlib import Path

from ..config import write_resolved_config
from ..synthscene import read_dataset
from ..trainer import (
    ABLATIONS,
    CONFIG_NAME,
    Trainer,
    exposure_sweep,
    load_run_config,
    ratio_spread,
)
from .command_system import Command, CommandRegistry, parse_float_list

logger = logging.getLogger(__name__)

DEFAULT_GAMMAS = "0.3,1.0,1.8"


def configure_train(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, type=Path, help="dataset directory")
    parser.add_argument("--config", help="run configuration (.toml or .json)")
    parser.add_argument("--out", required=True, type=Path, help="run directory")
    parser.add_argument("--resume", type=Path, help="checkpoint to continue from")
    parser.add_argument("--ablate", choices=ABLATIONS, help="drop loss terms and the learned response")
    parser.add_argument("--no-progress", action="store_true", help="hide the progress bar")


def run_train(args: argparse.Namespace) -> int:
    run = load_run_config(args.config).with_ablation(args.ablate)
    logger.info("resolved run config: %s", run.to_dict())
    dataset = read_dataset(args.data)
    trainer = Trainer(dataset, run, args.out)
    write_resolved_config(args.out / CONFIG_NAME, run.to_dict())
    if args.resume is not None:
        trainer.resume(args.resume)
    history = trainer.run(progress=not args.no_progress)
    if history:
        first, last = history[0], history[-1]
        print(f"trained to step {trainer.step}: loss {first.total:.5g} -> {last.total:.5g}")
    else:
        print(f"already at step {trainer.step}, nothing to train")
    return 0


def configure_sweep(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data", required=True, type=Path, help="source dataset directory")
    parser.add_argument("--out", required=True, type=Path, help="sweep directory")
    parser.add_argument(
        "--gammas",
        type=parse_float_list,
        default=parse_float_list(DEFAULT_GAMMAS),
        help=f"comma-separated exposure ratios (default {DEFAULT_GAMMAS})",
    )
    parser.add_argument("--config", help="run configuration (.toml or .json)")
    parser.add_argument("--no-progress", action="store_true", help="hide the progress bars")


def run_sweep(args: argparse.Namespace) -> int:
    run = load_run_config(args.config)
    logger.info("resolved run config: %s", run.to_dict())
    entries = exposure_sweep(args.data, args.out, args.gammas, run, progress=not args.no_progress)
    print(f"{'gamma':>7}  {'R':>7}  {'G':>7}  {'B':>7}  {'brightness':>10}")
    for e in entries:
        r, g, b = e.channel_ratios
        print(f"{e.gamma:>7.3g}  {r:>7.3f}  {g:>7.3f}  {b:>7.3f}  {e.brightness:>10.4f}")
    print(f"channel ratio spread across exposure ratios: {ratio_spread(entries):.2%}")
    return 0


def register_train_commands(registry: CommandRegistry) -> None:
    """
    Register training commands with the command registry.

    Args:
        registry: CommandRegistry to register commands with
    """
    registry.register_command(
        Command(
            id="train",
            name="Train a field",
            description="Fit the field and its sensor response to a low-light dataset.",
            configure=configure_train,
            action=run_train,
            category="Training",
        )
    )
    registry.register_command(
        Command(
            id="sweep",
            name="Exposure-ratio sweep",
            description="Rescale a dataset by several exposure ratios, retrain on each and compare enhanced renders.",
            configure=configure_sweep,
            action=run_sweep,
            category="Training",
        )
    )
