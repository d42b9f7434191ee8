"""Finite-difference gradient check command."""

import argparse
import logging

from ..checks import CASE_CHOICES, run_checks
from .command_system import Command, CommandRegistry

logger = logging.getLogger(__name__)


def configure_gradcheck(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=0, help="seed for the random inputs")
    parser.add_argument("--cases", choices=CASE_CHOICES, default="all", help="suite to run")


def run_gradcheck(args: argparse.Namespace) -> int:
    logger.info("resolved gradcheck settings: cases=%s seed=%d", args.cases, args.seed)
    results = run_checks(args.cases, args.seed)
    failures = 0
    for r in results:
        status = "ok" if r.passed else "FAIL"
        print(f"{status:>4}  {r.suite}/{r.name}: {r.error:.3e} (tolerance {r.tolerance:.0e})")
        failures += not r.passed
    if failures:
        logger.error("%d of %d gradient checks exceeded tolerance", failures, len(results))
        return 1
    print(f"all {len(results)} gradient checks passed")
    return 0


def register_check_commands(registry: CommandRegistry) -> None:
    """
    Register the gradient check command with the command registry.

    Args:
        registry: CommandRegistry to register commands with
    """
    registry.register_command(
        Command(
            id="gradcheck",
            name="Gradient checks",
            description="Compare analytic gradients with central finite differences.",
            configure=configure_gradcheck,
            action=run_gradcheck,
            category="Diagnostics",
        )
    )
