"""
Core command system for the command-line interface.

Each subcommand is a Command registered in a CommandRegistry; the registry
builds the argparse tree and dispatches parsed arguments to the command's
action.
"""

import argparse
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

logger = logging.getLogger(__name__)

Configure = Callable[[argparse.ArgumentParser], None]
Action = Callable[[argparse.Namespace], int]


@dataclass
class Command:
    """Represents a single subcommand that can be executed."""

    id: str
    name: str
    description: str
    configure: Configure
    action: Action
    category: str = "General"
    enabled: bool = True


class CommandRegistry:
    """Registry for managing all available subcommands."""

    def __init__(self):
        """Initialize the command registry."""
        self._commands: Dict[str, Command] = {}

    def register_command(self, command: Command) -> None:
        """
        Register a command in the registry.

        Args:
            command: Command to register

        Raises:
            ValueError: If a command with the same id is already registered
        """
        if command.id in self._commands:
            raise ValueError(f"command '{command.id}' is already registered")
        self._commands[command.id] = command

    def unregister_command(self, command_id: str) -> None:
        """
        Unregister a command from the registry.

        Args:
            command_id: ID of command to unregister
        """
        self._commands.pop(command_id, None)

    def get_command(self, command_id: str) -> Optional[Command]:
        """
        Get a command by ID.

        Args:
            command_id: ID of command to retrieve

        Returns:
            Command if found, None otherwise
        """
        return self._commands.get(command_id)

    def get_all_commands(self) -> List[Command]:
        """
        Get all registered commands.

        Returns:
            List of all commands in registration order
        """
        return list(self._commands.values())

    def build_parser(self, prog: str = "lumenfield") -> argparse.ArgumentParser:
        """
        Build the argument parser with one subparser per enabled command.

        Returns:
            Parser whose namespaces carry ``command`` (the command id)
        """
        parser = argparse.ArgumentParser(
            prog=prog,
            description="Low-light neural radiance fields with a learned sensor response.",
        )
        parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
        for command in self._commands.values():
            if not command.enabled:
                continue
            sub = subparsers.add_parser(command.id, help=command.name, description=command.description)
            command.configure(sub)
        return parser

    def execute_command(self, command_id: str, args: argparse.Namespace) -> int:
        """
        Execute a command by ID.

        Args:
            command_id: ID of command to execute
            args: Parsed arguments

        Returns:
            The command's exit code

        Raises:
            KeyError: If no enabled command has this id
        """
        command = self.get_command(command_id)
        if command is None or not command.enabled:
            raise KeyError(f"no such command '{command_id}'")
        logger.debug("running command %s", command_id)
        return command.action(args)


def parse_triple(text: str) -> tuple:
    """argparse type for ``r,g,b`` triples of floats."""
    values = _parse_floats(text)
    if len(values) != 3:
        raise argparse.ArgumentTypeError(f"expected three comma-separated numbers, got '{text}'")
    return tuple(values)


def parse_size(text: str) -> tuple:
    """argparse type for ``WxH`` image sizes."""
    try:
        width, height = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected WIDTHxHEIGHT, got '{text}'") from None
    if width < 2 or height < 2:
        raise argparse.ArgumentTypeError(f"image size must be at least 2x2, got '{text}'")
    return width, height


def parse_float_list(text: str) -> List[float]:
    """argparse type for comma-separated floats."""
    values = _parse_floats(text)
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _parse_floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: '{text}'") from None


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value
