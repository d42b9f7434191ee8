"""
Training objective: log tone-mapped data term, chromatic adaptation term,
local smoothness term of the response map, and the auto-exposure gain used
at test time.

All loss functions accept Tensors and return scalar Tensors so they can sit
on the tape. Colors that only serve as statistics (the gray-world target and
the smoothness edge weights) are read as constants.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from ..autodiff import Tensor, as_tensor, concat, log
from ..config import check_known_keys, get_config_manager
from ..errors import ConfigError, NonFiniteError, ShapeError

logger = logging.getLogger(__name__)

Colors = Union[Tensor, np.ndarray]

SMOOTH_PAIRINGS = ("cross", "same")


@dataclass
class LossConfig:
    """Weights and constants of the training objective."""

    lambda1: float = 1.0
    lambda2: float = 0.1
    lambda3: float = 0.1
    gamma1: float = 1.0
    gamma2: float = 1.0
    epsilon: float = 1e-4
    epsilon_prime: float = 1e-3
    target_mean: float = 0.4
    alpha_max: float = 100.0
    s_patch: int = 2
    smooth_pairing: str = "cross"

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "lambda3", "gamma1", "gamma2"):
            if getattr(self, name) < 0.0:
                raise ConfigError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.epsilon <= 0.0 or self.epsilon_prime <= 0.0:
            raise ConfigError("epsilon and epsilon_prime must be positive")
        if self.target_mean <= 0.0:
            raise ConfigError(f"target_mean must be positive, got {self.target_mean}")
        if self.alpha_max < 1.0:
            raise ConfigError(f"alpha_max must be >= 1, got {self.alpha_max}")
        if self.s_patch < 2:
            raise ConfigError(f"s_patch must be >= 2, got {self.s_patch}")
        if self.smooth_pairing not in SMOOTH_PAIRINGS:
            raise ConfigError(
                f"smooth_pairing must be one of {SMOOTH_PAIRINGS}, got '{self.smooth_pairing}'"
            )

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "LossConfig":
        check_known_keys("loss", values, cls.__dataclass_fields__)
        return cls(**values)

    @classmethod
    def from_config(cls) -> "LossConfig":
        """Create LossConfig from the ``[loss]`` table of config/train.toml."""
        return cls.from_dict(get_config_manager().get_section("loss"))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @property
    def weights(self) -> Tuple[float, float, float]:
        return (self.lambda1, self.lambda2, self.lambda3)


@dataclass(frozen=True)
class LossBreakdown:
    """Component losses and their weighted total, as plain floats."""

    data: float
    ca: float
    smooth: float
    total: float

    def __post_init__(self):
        for name in ("data", "ca", "smooth", "total"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise NonFiniteError(f"loss.{name}", f"value {value}")
            if value < 0.0:
                raise ValueError(f"loss.{name} must be >= 0, got {value}")

    def as_row(self) -> Tuple[float, float, float, float]:
        return (self.data, self.ca, self.smooth, self.total)


def _constant(values: Colors) -> np.ndarray:
    return values.data if isinstance(values, Tensor) else np.asarray(values, dtype=np.float64)


def data_loss(c_l: Colors, c_gt: Colors, epsilon_prime: float = 1e-3) -> Tensor:
    """
    Log tone-mapped reconstruction error against the observed raw color.

    psi(y) = log(y + epsilon_prime); loss = mean (psi(C_l) - psi(C_GT))^2.
    Dark pixels get a larger weight than bright ones for the same absolute error.

    Args:
        c_l: Rendered low-light colors, shape (R, 3)
        c_gt: Black-level-subtracted raw colors, shape (R, 3)
        epsilon_prime: Tone-map offset

    Returns:
        Scalar Tensor; only ``c_l`` receives gradient

    Raises:
        ValueError: If C_l + epsilon_prime is not positive
    """
    c_l = as_tensor(c_l)
    target = _constant(c_gt)
    if c_l.shape != target.shape:
        raise ShapeError(f"data_loss: {c_l.shape} vs {target.shape}")
    if np.any(c_l.data + epsilon_prime <= 0.0):
        raise ValueError("data_loss: C_l + epsilon_prime must be positive")
    psi_gt = np.log(np.maximum(target, 0.0) + epsilon_prime)
    return (log(c_l + epsilon_prime) - psi_gt).square().mean()


def gray_world_target(colors: Colors) -> np.ndarray:
    """
    Per-channel gray-world gains K_avg / mean_k over a batch of colors.

    Raises:
        ValueError: If any channel mean is not positive
    """
    values = _constant(colors).reshape(-1, 3)
    means = values.mean(axis=0)
    if np.any(means <= 0.0):
        raise ValueError(f"gray-world target needs positive channel means, got {means}")
    return means.mean() / means


def chromatic_adaptation_loss(s: Tensor, c: Colors) -> Tensor:
    """
    Pull the integrated response toward gray-world gains.

    loss = (1/3) sum_r sum_k (K_avg / Cbar_k - S_k(r))^2 with the target held
    constant, so dloss/dS_k(r) = 2 (S_k(r) - K_avg / Cbar_k) / 3.

    Args:
        s: Integrated response per ray, shape (N, 3)
        c: Rendered colors of the same rays, shape (N, 3); read as constants

    Returns:
        Scalar Tensor
    """
    s = as_tensor(s)
    if s.ndim != 2 or s.shape[1] != 3 or s.shape[0] < 1:
        raise ShapeError(f"chromatic_adaptation_loss: S must be (N, 3), got {s.shape}")
    target = gray_world_target(c)
    return (s - target).square().sum() * (1.0 / 3.0)


def _forward_differences(values: Tensor) -> Tuple[Tensor, Tensor]:
    """Vertical and horizontal forward differences, zero at the far border."""
    n, height, width, channels = values.shape
    if height > 1:
        dv = values[:, 1:, :, :] - values[:, :-1, :, :]
        dv = concat([dv, Tensor(np.zeros((n, 1, width, channels)))], axis=1)
    else:
        dv = Tensor(np.zeros(values.shape))
    if width > 1:
        dh = values[:, :, 1:, :] - values[:, :, :-1, :]
        dh = concat([dh, Tensor(np.zeros((n, height, 1, channels)))], axis=2)
    else:
        dh = Tensor(np.zeros(values.shape))
    return dv, dh


def _numpy_differences(values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    dv = np.zeros_like(values)
    dh = np.zeros_like(values)
    dv[:, :-1] = values[:, 1:] - values[:, :-1]
    dh[:, :, :-1] = values[:, :, 1:] - values[:, :, :-1]
    return dv, dh


def smoothness_loss(
    s_patch: Tensor,
    c_patch: Colors,
    gamma1: float = 1.0,
    gamma2: float = 1.0,
    epsilon: float = 1e-4,
    pairing: str = "cross",
) -> Tensor:
    """
    Edge-aware smoothness of the response map over pixel patches.

    With channel-summed squared forward differences S_v, S_h of the response
    and C_v, C_h of the color:

        cross: sum gamma1 S_v / (C_h + eps) + gamma2 S_h / (C_v + eps)
        same:  sum gamma1 S_v / (C_v + eps) + gamma2 S_h / (C_h + eps)

    Differences past the patch border are zero.

    Args:
        s_patch: Response map, shape (P, H, W, K)
        c_patch: Color map over the same pixels, shape (P, H, W, K); constant
        gamma1: Weight of the vertical response term
        gamma2: Weight of the horizontal response term
        epsilon: Stabilizer
        pairing: "cross" or "same"

    Returns:
        Scalar Tensor

    Raises:
        ValueError: If a patch has no adjacent pixel pair
    """
    s_patch = as_tensor(s_patch)
    colors = _constant(c_patch)
    if s_patch.ndim != 4:
        raise ShapeError(f"smoothness_loss: patches must be (P, H, W, K), got {s_patch.shape}")
    if colors.shape != s_patch.shape:
        raise ShapeError(f"smoothness_loss: {s_patch.shape} vs {colors.shape}")
    if s_patch.shape[1] < 2 and s_patch.shape[2] < 2:
        raise ValueError("smoothness_loss: patch has no adjacent pixel pair")
    if pairing not in SMOOTH_PAIRINGS:
        raise ValueError(f"unknown smoothness pairing '{pairing}'")

    sv, sh = _forward_differences(s_patch)
    sv2 = sv.square().sum(axis=-1)
    sh2 = sh.square().sum(axis=-1)

    cv, ch = _numpy_differences(colors)
    cv2 = np.sum(cv**2, axis=-1)
    ch2 = np.sum(ch**2, axis=-1)
    if pairing == "cross":
        denom_v, denom_h = ch2, cv2
    else:
        denom_v, denom_h = cv2, ch2

    return (sv2 * (gamma1 / (denom_v + epsilon))).sum() + (
        sh2 * (gamma2 / (denom_h + epsilon))
    ).sum()


def to_patches(values: Colors, patch_side: int) -> Colors:
    """Reshape patch-major (R, K) ray values into (P, side, side, K)."""
    count, channels = values.shape
    if count % (patch_side * patch_side) != 0:
        raise ShapeError(f"{count} rays do not split into {patch_side}x{patch_side} patches")
    shape = (count // (patch_side * patch_side), patch_side, patch_side, channels)
    return values.reshape(shape)


def auto_exposure_gain(
    c_s: Colors, target_mean: float = 0.4, alpha_max: float = 100.0
) -> float:
    """
    Exposure gain mapping a restored image to a target mean brightness.

    Args:
        c_s: Restored linear colors of one image, any shape
        target_mean: Desired mean in the linear domain
        alpha_max: Upper clamp

    Returns:
        target_mean / mean(c_s), clamped to [1, alpha_max]

    Raises:
        ValueError: If the image mean is not positive
    """
    level = float(np.mean(_constant(c_s)))
    if not level > 0.0:
        raise ValueError("auto_exposure_gain: image mean must be positive")
    return float(np.clip(target_mean / level, 1.0, alpha_max))


def total_loss(parts: Sequence[float], cfg: LossConfig) -> LossBreakdown:
    """
    Weighted sum of the (data, ca, smooth) components.

    Args:
        parts: Component values in order data, ca, smooth
        cfg: Loss configuration supplying the weights

    Returns:
        LossBreakdown carrying the components and their total
    """
    data, ca, smooth = (float(p) for p in parts)
    total = cfg.lambda1 * data + cfg.lambda2 * ca + cfg.lambda3 * smooth
    return LossBreakdown(data=data, ca=ca, smooth=smooth, total=total)


def objective(
    color_low: Tensor,
    response: Tensor,
    c_gt: Colors,
    cfg: LossConfig,
    patch_side: int,
) -> Tuple[Tensor, LossBreakdown]:
    """
    Assemble the full training loss over one patch-structured ray batch.

    Terms with a zero weight are not evaluated and are reported as 0.

    Args:
        color_low: Rendered low-light colors (R, 3), patch-major
        response: Integrated response (R, 3), same order
        c_gt: Observed colors (R, 3)
        cfg: Loss configuration
        patch_side: Side of the square patches in the batch

    Returns:
        (scalar loss Tensor for backward, LossBreakdown of the values)
    """
    terms = [data_loss(color_low, c_gt, cfg.epsilon_prime)]
    values = [terms[0].item()]

    if cfg.lambda2 > 0.0:
        ca = chromatic_adaptation_loss(response, color_low.data)
        terms.append(ca * cfg.lambda2)
        values.append(ca.item())
    else:
        values.append(0.0)

    if cfg.lambda3 > 0.0:
        smooth = smoothness_loss(
            to_patches(response, patch_side),
            to_patches(color_low.data, patch_side),
            cfg.gamma1,
            cfg.gamma2,
            cfg.epsilon,
            cfg.smooth_pairing,
        )
        terms.append(smooth * cfg.lambda3)
        values.append(smooth.item())
    else:
        values.append(0.0)

    loss = terms[0] * cfg.lambda1
    for term in terms[1:]:
        loss = loss + term
    breakdown = total_loss(values, cfg)
    logger.debug(
        "loss data=%.6g ca=%.6g smooth=%.6g total=%.6g",
        breakdown.data,
        breakdown.ca,
        breakdown.smooth,
        breakdown.total,
    )
    return loss, breakdown
