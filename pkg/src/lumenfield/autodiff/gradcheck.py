"""
Central finite-difference gradient checks against the tape's analytic gradients.
"""

from typing import Callable, List, Sequence, Union

import numpy as np

from ..errors import NonFiniteError, ShapeError
from .tensor import Tensor, backward

Inputs = Union[Tensor, Sequence[Tensor]]


def _as_list(x: Inputs) -> List[Tensor]:
    return [x] if isinstance(x, Tensor) else list(x)


def _scalar(value: Tensor) -> float:
    if value.size != 1:
        raise ShapeError(f"grad_check function must return a scalar, got {value.shape}")
    result = value.item()
    if not np.isfinite(result):
        raise NonFiniteError("grad_check", "function value")
    return result


def grad_check(f: Callable[..., Tensor], x: Inputs, step: float = 1e-5) -> float:
    """
    Compare analytic gradients of ``f`` with central differences.

    Args:
        f: Function of one or more tensors returning a scalar tensor
        x: Tensor or sequence of tensors at which to check
        step: Finite-difference step

    Returns:
        max over coordinates of |analytic - numeric| / max(1, |analytic|)
    """
    inputs = _as_list(x)
    probes = [Tensor(t.data.copy(), requires_grad=True) for t in inputs]
    root = f(*probes)
    _scalar(root)
    backward(root)

    worst = 0.0
    for slot, probe in enumerate(probes):
        analytic = probe.grad if probe.grad is not None else np.zeros_like(probe.data)
        base = probe.data
        flat = base.reshape(-1)
        for i in range(flat.size):
            values = []
            for sign in (1.0, -1.0):
                shifted = flat.copy()
                shifted[i] += sign * step
                args = [Tensor(t.data) for t in inputs]
                args[slot] = Tensor(shifted.reshape(base.shape))
                values.append(_scalar(f(*args)))
            numeric = (values[0] - values[1]) / (2.0 * step)
            a = float(analytic.reshape(-1)[i])
            worst = max(worst, abs(a - numeric) / max(1.0, abs(a)))
    return worst
