"""
Command system for the lumenfield command line.

Each module registers its subcommands with a CommandRegistry, which builds
the argument parser and dispatches to the command actions.
"""

from .check_commands import register_check_commands
from .command_system import Command, CommandRegistry
from .dataset_commands import register_dataset_commands, resolve_synthesize_config
from .render_commands import register_render_commands
from .train_commands import register_train_commands


def create_registry() -> CommandRegistry:
    """Registry holding every subcommand, in the order shown by ``--help``."""
    registry = CommandRegistry()
    register_dataset_commands(registry)
    register_train_commands(registry)
    register_render_commands(registry)
    register_check_commands(registry)
    return registry


__all__ = [
    "Command",
    "CommandRegistry",
    "create_registry",
    "register_check_commands",
    "register_dataset_commands",
    "register_render_commands",
    "register_train_commands",
    "resolve_synthesize_config",
]
