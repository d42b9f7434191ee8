"""
Scene field networks.

The trunk maps an encoded position to a density and a feature vector h. Two
heads read h together with the encoded view direction: the color head gives
the low-light linear color c_l, the response head gives the per-point
diagonal sensor response s used to restore color.
"""

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Dict, Iterator, List, Tuple, Union

import numpy as np

from ..autodiff import Tensor, clip, concat, load_tensors, save_tensors
from ..config import check_known_keys, get_config_manager
from ..errors import CheckpointError, ConfigError
from .encoding import EncodingConfig, encode

DIRECTION_TOLERANCE = 1e-6


@dataclass
class FieldConfig:
    """Network sizes and response parameterization."""

    position_frequencies: int = 6
    direction_frequencies: int = 2
    trunk_depth: int = 4
    trunk_width: int = 128
    head_width: int = 64
    s_floor: float = 1e-2
    s_max: float = 100.0
    init_response: float = 1.0
    freeze_response: bool = False

    def __post_init__(self):
        if self.trunk_depth < 1 or self.trunk_width < 1 or self.head_width < 1:
            raise ConfigError("network depth and widths must be positive")
        if not 0.0 < self.s_floor < self.s_max:
            raise ConfigError("need 0 < s_floor < s_max")
        if not self.s_floor < self.init_response <= self.s_max:
            raise ConfigError("init_response must lie in (s_floor, s_max]")

    @property
    def encoding(self) -> EncodingConfig:
        return EncodingConfig(self.position_frequencies, self.direction_frequencies)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> "FieldConfig":
        check_known_keys("field", values, cls.__dataclass_fields__)
        return cls(**values)

    @classmethod
    def from_config(cls) -> "FieldConfig":
        """Create FieldConfig from the ``[field]`` table of config/train.toml."""
        return cls.from_dict(get_config_manager().get_section("field"))

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class PointOutput:
    """Per-point field values; leading dimension indexes points."""

    sigma: Tensor
    h: Tensor
    c_l: Tensor
    s: Tensor


class FieldParams:
    """
    All learnable weights, keyed by canonical name.

    Names: ``trunk.{i}.w/b`` for hidden layers, ``trunk.sigma.w/b`` for the
    density output, ``color.{0,1}.w/b`` and ``response.{0,1}.w/b`` for heads.
    """

    def __init__(self, config: FieldConfig, tensors: Dict[str, Tensor]):
        self.config = config
        self.tensors = tensors
        self._validate()

    def _validate(self) -> None:
        expected = _layer_shapes(self.config)
        missing = sorted(set(expected) - set(self.tensors))
        if missing:
            raise CheckpointError(f"missing field tensors: {', '.join(missing)}")
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise CheckpointError(
                    f"tensor '{name}' has shape {self.tensors[name].shape}, expected {shape}"
                )

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def names(self) -> List[str]:
        return list(self.tensors)

    def parameters(self) -> Iterator[Tuple[str, Tensor]]:
        """Trainable tensors; the response head is skipped while frozen."""
        for name, tensor in self.tensors.items():
            if self.config.freeze_response and name.startswith("response."):
                continue
            yield name, tensor

    def zero_grad(self) -> None:
        for tensor in self.tensors.values():
            tensor.zero_grad()

    def arrays(self) -> Dict[str, np.ndarray]:
        return {name: t.data for name, t in self.tensors.items()}

    def copy(self) -> "FieldParams":
        return FieldParams(
            self.config,
            {n: Tensor(t.data.copy(), requires_grad=True, name=n) for n, t in self.tensors.items()},
        )

    @classmethod
    def from_arrays(cls, config: FieldConfig, arrays: Dict[str, np.ndarray]) -> "FieldParams":
        expected = _layer_shapes(config)
        tensors = {
            name: Tensor(arrays[name], requires_grad=True, name=name)
            for name in expected
            if name in arrays
        }
        return cls(config, tensors)

    def save(self, path: Union[str, Path]) -> None:
        save_tensors(path, self.tensors)

    @classmethod
    def load(cls, path: Union[str, Path], config: FieldConfig) -> "FieldParams":
        return cls.from_arrays(config, load_tensors(path))


def _layer_shapes(config: FieldConfig) -> Dict[str, Tuple[int, ...]]:
    enc = config.encoding
    shapes: Dict[str, Tuple[int, ...]] = {}
    fan_in = enc.position_dim
    for i in range(config.trunk_depth):
        shapes[f"trunk.{i}.w"] = (fan_in, config.trunk_width)
        shapes[f"trunk.{i}.b"] = (config.trunk_width,)
        fan_in = config.trunk_width
    shapes["trunk.sigma.w"] = (config.trunk_width, 1)
    shapes["trunk.sigma.b"] = (1,)
    head_in = config.trunk_width + enc.direction_dim
    for head in ("color", "response"):
        shapes[f"{head}.0.w"] = (head_in, config.head_width)
        shapes[f"{head}.0.b"] = (config.head_width,)
        shapes[f"{head}.1.w"] = (config.head_width, 3)
        shapes[f"{head}.1.b"] = (3,)
    return shapes


def _inverse_softplus(y: float) -> float:
    return float(np.log(np.expm1(y)))


def init_field_params(config: FieldConfig, seed: int = 0) -> FieldParams:
    """
    Glorot-uniform weights, zero biases, response bias set so s == init_response.

    Args:
        config: Network configuration
        seed: Seed for the weight draws

    Returns:
        Freshly initialized FieldParams
    """
    rng = np.random.default_rng(seed)
    arrays: Dict[str, np.ndarray] = {}
    for name, shape in _layer_shapes(config).items():
        if name.endswith(".b"):
            arrays[name] = np.zeros(shape)
            continue
        limit = np.sqrt(6.0 / (shape[0] + shape[1]))
        weights = rng.uniform(-limit, limit, size=shape)
        if name == "response.1.w":
            weights *= 0.1
        arrays[name] = weights
    arrays["response.1.b"] = np.full(
        3, _inverse_softplus(config.init_response - config.s_floor)
    )
    return FieldParams.from_arrays(config, arrays)


def _check_directions(d: np.ndarray) -> None:
    norms = np.linalg.norm(d, axis=-1)
    if np.any(np.abs(norms - 1.0) > DIRECTION_TOLERANCE):
        raise ValueError("view directions must be unit vectors (within 1e-6)")


def eval_points(params: FieldParams, x: np.ndarray, d: np.ndarray) -> PointOutput:
    """
    Evaluate the field at many points.

    Args:
        params: Field weights
        x: Sample positions, shape (M, 3)
        d: Unit view directions, shape (M, 3)

    Returns:
        PointOutput with sigma (M,), h (M, W), c_l (M, 3), s (M, 3)
    """
    cfg = params.config
    x = np.asarray(x, dtype=np.float64).reshape(-1, 3)
    d = np.asarray(d, dtype=np.float64).reshape(-1, 3)
    _check_directions(d)

    h = Tensor(encode(x, cfg.position_frequencies))
    for i in range(cfg.trunk_depth):
        h = (h @ params[f"trunk.{i}.w"] + params[f"trunk.{i}.b"]).relu()
    # density depends on position only
    sigma = (h @ params["trunk.sigma.w"] + params["trunk.sigma.b"]).softplus()
    sigma = sigma.reshape(-1)

    head_in = concat([h, Tensor(encode(d, cfg.direction_frequencies))], axis=-1)

    hidden = (head_in @ params["color.0.w"] + params["color.0.b"]).relu()
    c_l = (hidden @ params["color.1.w"] + params["color.1.b"]).sigmoid()

    if cfg.freeze_response:
        s = Tensor(np.ones((x.shape[0], 3)))
    else:
        hidden = (head_in @ params["response.0.w"] + params["response.0.b"]).relu()
        raw = hidden @ params["response.1.w"] + params["response.1.b"]
        s = clip(raw.softplus() + cfg.s_floor, upper=cfg.s_max)

    return PointOutput(sigma=sigma, h=h, c_l=c_l, s=s)


def eval_point(params: FieldParams, x, d) -> PointOutput:
    """Evaluate the field at a single (x, d) pair."""
    return eval_points(params, np.reshape(x, (1, 3)), np.reshape(d, (1, 3)))


def restore_color(c_l, s):
    """
    Apply the diagonal response: c_s = c_l * diag(s_R, s_G, s_B).

    Works on Tensors (keeps the tape) or plain arrays.
    """
    if isinstance(c_l, Tensor) or isinstance(s, Tensor):
        return c_l * s if isinstance(c_l, Tensor) else s * c_l
    s = np.asarray(s, dtype=np.float64)
    if np.any(s <= 0.0):
        raise ValueError("response must be strictly positive")
    return np.asarray(c_l, dtype=np.float64) * s
