"""Reverse-mode automatic differentiation over dense float64 tensors."""

from .checkpoint import load_tensors, save_tensors
from .gradcheck import grad_check
from .tensor import (
    Graph,
    Tensor,
    add,
    as_tensor,
    backward,
    broadcast_to,
    clip,
    concat,
    cumsum_exclusive,
    current_graph,
    div,
    exp,
    forward_op,
    index,
    log,
    matmul,
    mean,
    mul,
    neg,
    no_grad,
    relu,
    reshape,
    sigmoid,
    softplus,
    square,
    sub,
    tensor_sum,
)

__all__ = [
    "Graph",
    "Tensor",
    "add",
    "as_tensor",
    "backward",
    "broadcast_to",
    "clip",
    "concat",
    "cumsum_exclusive",
    "current_graph",
    "div",
    "exp",
    "forward_op",
    "grad_check",
    "index",
    "load_tensors",
    "log",
    "matmul",
    "mean",
    "mul",
    "neg",
    "no_grad",
    "relu",
    "reshape",
    "save_tensors",
    "sigmoid",
    "softplus",
    "square",
    "sub",
    "tensor_sum",
]
