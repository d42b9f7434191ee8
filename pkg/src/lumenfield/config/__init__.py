"""
Configuration system for Lumenfield.

Loads the TOML defaults under ``config/`` and user run files (TOML or JSON).
Provides centralized access to training, field, loss and synthesis settings.
"""

import json
import logging
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, Optional, Union

import toml

from ..errors import ConfigError

logger = logging.getLogger(__name__)

# Get the project root directory
PROJECT_ROOT = Path(__file__).parent.parent.parent.parent
CONFIG_DIR = PROJECT_ROOT / "config"

THREADS_ENV = "LUMENFIELD_THREADS"


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Load a run configuration file.

    Args:
        path: ``.toml`` or ``.json`` file

    Returns:
        Parsed mapping of sections to values

    Raises:
        ConfigError: If the file is missing, unparsable or of unknown type
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        if path.suffix == ".json":
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        elif path.suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        else:
            raise ConfigError(f"unsupported config format '{path.suffix}' (use .toml or .json)")
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a table/object")
    return data


def write_resolved_config(path: Union[str, Path], sections: Dict[str, Dict[str, Any]]) -> None:
    """Write the fully resolved configuration next to a run's outputs."""
    with open(path, "w", encoding="utf-8") as f:
        toml.dump(sections, f)


def check_known_keys(section: str, values: Dict[str, Any], known) -> None:
    """Reject keys a config dataclass does not declare."""
    unknown = sorted(set(values) - set(known))
    if unknown:
        raise ConfigError(f"unknown keys in [{section}]: {', '.join(unknown)}")


class ConfigManager:
    """Manages loading of the default configuration files."""

    def __init__(self, config_dir: Optional[Path] = None):
        """Initialize the config manager and load all configs."""
        self.config_dir = config_dir or CONFIG_DIR
        self.train_config: Dict[str, Any] = {}
        self.synthesize_config: Dict[str, Any] = {}
        self._load_all_configs()

    def _load_all_configs(self) -> None:
        """Load all TOML configuration files."""
        for attr, filename in (
            ("train_config", "train.toml"),
            ("synthesize_config", "synthesize.toml"),
        ):
            path = self.config_dir / filename
            if not path.exists():
                logger.debug("no %s in %s, using built-in defaults", filename, self.config_dir)
                setattr(self, attr, {})
                continue
            try:
                with open(path, "rb") as f:
                    setattr(self, attr, tomllib.load(f))
            except (OSError, tomllib.TOMLDecodeError) as e:
                # Fall back to dataclass defaults
                logger.warning("failed to load %s: %s", path, e)
                setattr(self, attr, {})

    def get_section(self, name: str) -> Dict[str, Any]:
        """Get a default section (``train``, ``field``, ``loss``, ``synthesize``)."""
        if name == "synthesize":
            return dict(self.synthesize_config.get("synthesize", {}))
        return dict(self.train_config.get(name, {}))

    def reload_configs(self) -> None:
        """Reload all configuration files (useful for development)."""
        self._load_all_configs()


# Global config manager instance
_config_manager: Optional[ConfigManager] = None


def get_config_manager() -> ConfigManager:
    """Get the global config manager instance."""
    global _config_manager
    if _config_manager is None:
        _config_manager = ConfigManager()
    return _config_manager


def reload_configs() -> None:
    """Reload all configuration files."""
    global _config_manager
    if _config_manager is not None:
        _config_manager.reload_configs()


def get_thread_count() -> int:
    """
    Worker cap from ``LUMENFIELD_THREADS``.

    Returns:
        Positive worker count; 0 or unset means one per CPU
    """
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        requested = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got '{raw}'") from None
    if requested < 0:
        raise ConfigError(f"{THREADS_ENV} must be >= 0, got {requested}")
    return requested or (os.cpu_count() or 1)
