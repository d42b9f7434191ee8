"""Scene representation: encoding, density trunk, color and response heads."""

from .encoding import EncodingConfig, encode, encoded_dim
from .network import (
    FieldConfig,
    FieldParams,
    PointOutput,
    eval_point,
    eval_points,
    init_field_params,
    restore_color,
)

__all__ = [
    "EncodingConfig",
    "FieldConfig",
    "FieldParams",
    "PointOutput",
    "encode",
    "encoded_dim",
    "eval_point",
    "eval_points",
    "init_field_params",
    "restore_color",
]
