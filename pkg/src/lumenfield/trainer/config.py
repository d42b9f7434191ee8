"""
Run configuration: optimizer and sampling settings plus the field and loss
sections, resolved from config/train.toml and an optional user file.
"""

import logging
import dataclasses
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

from ..config import check_known_keys, get_config_manager, load_config_file
from ..errors import ConfigError
from ..field import FieldConfig
from ..objective import LossConfig

logger = logging.getLogger(__name__)

ABLATIONS = ("no-ca", "no-smooth", "baseline")
RUN_SECTIONS = ("train", "field", "loss")
CONFIG_NAME = "config.toml"


@dataclass
class TrainConfig:
    """Optimization schedule, batching and bookkeeping intervals."""

    steps: int = 20000
    batch_rays: int = 256
    patch_side: int = 2
    n_samples: int = 64
    lr_start: float = 1e-3
    lr_end: float = 1e-5
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    log_interval: int = 100
    checkpoint_interval: int = 2000
    render_chunk: int = 4096

    def __post_init__(self):
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1, got {self.steps}")
        if self.patch_side < 2:
            raise ConfigError(f"patch_side must be >= 2, got {self.patch_side}")
        if self.batch_rays < 1 or self.batch_rays % (self.patch_side ** 2):
            raise ConfigError(
                f"batch_rays ({self.batch_rays}) must be a positive multiple of "
                f"patch_side^2 ({self.patch_side ** 2})"
            )
        if self.n_samples < 2:
            raise ConfigError(f"n_samples must be >= 2, got {self.n_samples}")
        if not self.lr_start >= self.lr_end > 0.0:
            raise ConfigError(f"need lr_start >= lr_end > 0, got {self.lr_start}, {self.lr_end}")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ConfigError("Adam betas must lie in [0, 1)")
        if self.adam_eps <= 0.0:
            raise ConfigError("adam_eps must be positive")
        if self.log_interval < 1 or self.checkpoint_interval < 1 or self.render_chunk < 1:
            raise ConfigError("log_interval, checkpoint_interval and render_chunk must be >= 1")

    @property
    def patches_per_batch(self) -> int:
        return self.batch_rays // (self.patch_side ** 2)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "TrainConfig":
        check_known_keys("train", values, cls.__dataclass_fields__)
        return cls(**values)

    @classmethod
    def from_config(cls) -> "TrainConfig":
        return cls.from_dict(get_config_manager().get_section("train"))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class RunConfig:
    """The three configuration sections of a training run."""

    train: TrainConfig = dataclasses.field(default_factory=TrainConfig)
    field: FieldConfig = dataclasses.field(default_factory=FieldConfig)
    loss: LossConfig = dataclasses.field(default_factory=LossConfig)

    def __post_init__(self):
        if self.train.patch_side != self.loss.s_patch:
            raise ConfigError(
                f"train.patch_side ({self.train.patch_side}) must equal loss.s_patch ({self.loss.s_patch})"
            )

    def with_ablation(self, name: Optional[str]) -> "RunConfig":
        """
        Apply an ablation.

        Args:
            name: ``no-ca`` (no chromatic adaptation, response frozen at 1),
                ``no-smooth`` (no smoothness term), ``baseline`` (both), or None

        Returns:
            A new RunConfig
        """
        if name is None:
            return self
        if name not in ABLATIONS:
            raise ConfigError(f"unknown ablation '{name}', expected one of {ABLATIONS}")
        loss, field_cfg = self.loss, self.field
        if name in ("no-ca", "baseline"):
            loss = replace(loss, lambda2=0.0)
            field_cfg = replace(field_cfg, freeze_response=True)
        if name in ("no-smooth", "baseline"):
            loss = replace(loss, lambda3=0.0)
        return RunConfig(train=self.train, field=field_cfg, loss=loss)

    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        return {"train": self.train.to_dict(), "field": self.field.to_dict(), "loss": self.loss.to_dict()}

    @classmethod
    def from_sections(cls, sections: Dict[str, Dict[str, Any]]) -> "RunConfig":
        unknown = sorted(set(sections) - set(RUN_SECTIONS))
        if unknown:
            raise ConfigError(f"unknown config sections: {', '.join(unknown)}")
        return cls(
            train=TrainConfig.from_dict(dict(sections.get("train", {}))),
            field=FieldConfig.from_dict(dict(sections.get("field", {}))),
            loss=LossConfig.from_dict(dict(sections.get("loss", {}))),
        )


def load_run_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    Resolve a run configuration.

    Defaults come from config/train.toml (or the dataclass defaults when it
    is absent); a user file, TOML or JSON, overrides them key by key.

    Args:
        path: Optional user configuration file

    Returns:
        The resolved RunConfig
    """
    manager = get_config_manager()
    sections = {name: manager.get_section(name) for name in RUN_SECTIONS}
    if path is not None:
        overrides = load_config_file(path)
        unknown = sorted(set(overrides) - set(RUN_SECTIONS))
        if unknown:
            raise ConfigError(f"{path}: unknown config sections: {', '.join(unknown)}")
        for name, values in overrides.items():
            if not isinstance(values, dict):
                raise ConfigError(f"{path}: section [{name}] must be a table")
            sections[name].update(values)
    run = RunConfig.from_sections(sections)
    logger.debug("resolved run config: %s", run.to_dict())
    return run


def load_checkpoint_config(
    checkpoint: Union[str, Path], path: Optional[Union[str, Path]] = None
) -> RunConfig:
    """
    Run configuration for rendering a checkpoint.

    An explicit ``path`` wins; otherwise the ``config.toml`` a training run
    wrote beside its checkpoints is used, and failing that the defaults.
    """
    if path is not None:
        return load_run_config(path)
    beside = Path(checkpoint).parent / CONFIG_NAME
    if beside.exists():
        return load_run_config(beside)
    logger.warning("no %s beside %s, using default field settings", CONFIG_NAME, checkpoint)
    return load_run_config()
