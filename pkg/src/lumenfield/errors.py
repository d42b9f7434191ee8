"""
Exception types shared across Lumenfield.

Contract breaches raise the narrowest type here so the command line can map
them to an exit status without swallowing programming errors.
"""

from typing import Dict, Optional


class LumenfieldError(Exception):
    """Base class for all errors raised deliberately by Lumenfield."""


class ShapeError(LumenfieldError, ValueError):
    """Operand shapes do not conform to an operation's shape rule."""


class NonFiniteError(LumenfieldError, ArithmeticError):
    """A computation produced NaN or Inf."""

    def __init__(self, op: str, detail: str = ""):
        self.op = op
        message = f"non-finite result produced by '{op}'"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ConfigError(LumenfieldError, ValueError):
    """A configuration value is missing, unknown or out of range."""


class DatasetError(LumenfieldError):
    """A dataset directory, manifest or raw file is malformed or missing."""


class CheckpointError(LumenfieldError):
    """A checkpoint file cannot be read or does not match the model."""


class TrainingDivergedError(LumenfieldError):
    """The training loss became non-finite."""

    def __init__(self, step: int, diagnostics: Optional[Dict[str, float]] = None):
        self.step = step
        self.diagnostics = diagnostics or {}
        details = ", ".join(f"{k}={v:.6g}" for k, v in self.diagnostics.items())
        super().__init__(f"training diverged at step {step} ({details})")
