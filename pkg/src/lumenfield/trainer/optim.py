"""Adam with a log-linear learning-rate decay."""

from typing import Dict, Tuple

import numpy as np

from ..errors import CheckpointError, ShapeError
from ..field import FieldParams
from .config import TrainConfig


def lr_schedule(step: int, cfg: TrainConfig) -> float:
    """
    Log-linear decay: lr_start * (lr_end / lr_start) ** (step / steps).

    Raises:
        ValueError: If step lies outside [0, steps]
    """
    if not 0 <= step <= cfg.steps:
        raise ValueError(f"step {step} outside [0, {cfg.steps}]")
    return float(cfg.lr_start * (cfg.lr_end / cfg.lr_start) ** (step / cfg.steps))


def adam_update(
    param: np.ndarray,
    grad: np.ndarray,
    m: np.ndarray,
    v: np.ndarray,
    lr: float,
    beta1: float,
    beta2: float,
    eps: float,
    step: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    One bias-corrected Adam step.

    Args:
        param: Current value
        grad: Gradient of the loss w.r.t. ``param``
        m: First-moment estimate
        v: Second-moment estimate
        lr: Learning rate
        beta1: First-moment decay
        beta2: Second-moment decay
        eps: Denominator stabilizer
        step: 1-based step count

    Returns:
        (new param, new m, new v)
    """
    if not (param.shape == grad.shape == m.shape == v.shape):
        raise ShapeError("adam_update: param, grad and moments must share a shape")
    if step < 1:
        raise ValueError(f"Adam step count is 1-based, got {step}")
    m = beta1 * m + (1.0 - beta1) * grad
    v = beta2 * v + (1.0 - beta2) * grad * grad
    m_hat = m / (1.0 - beta1 ** step)
    v_hat = v / (1.0 - beta2 ** step)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps), m, v


class AdamOptimizer:
    """Adam over the trainable tensors of a FieldParams."""

    def __init__(self, params: FieldParams, cfg: TrainConfig):
        self.params = params
        self.beta1 = cfg.adam_beta1
        self.beta2 = cfg.adam_beta2
        self.eps = cfg.adam_eps
        self.t = 0
        self.m: Dict[str, np.ndarray] = {}
        self.v: Dict[str, np.ndarray] = {}
        for name, tensor in params.parameters():
            self.m[name] = np.zeros_like(tensor.data)
            self.v[name] = np.zeros_like(tensor.data)

    def step(self, lr: float) -> None:
        """Apply one update in place using the gradients held by the tensors."""
        self.t += 1
        for name, tensor in self.params.parameters():
            grad = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
            tensor.data, self.m[name], self.v[name] = adam_update(
                tensor.data, grad, self.m[name], self.v[name],
                lr, self.beta1, self.beta2, self.eps, self.t,
            )

    def state_arrays(self) -> Dict[str, np.ndarray]:
        """Moments and step count keyed for a checkpoint."""
        state = {"adam.t": np.array(float(self.t))}
        for name in self.m:
            state[f"adam.m.{name}"] = self.m[name]
            state[f"adam.v.{name}"] = self.v[name]
        return state

    def load_state_arrays(self, arrays: Dict[str, np.ndarray]) -> None:
        try:
            self.t = int(arrays["adam.t"])
            for name in self.m:
                self.m[name] = np.array(arrays[f"adam.m.{name}"], dtype=np.float64)
                self.v[name] = np.array(arrays[f"adam.v.{name}"], dtype=np.float64)
        except KeyError as exc:
            raise CheckpointError(f"checkpoint lacks optimizer state {exc}") from None
