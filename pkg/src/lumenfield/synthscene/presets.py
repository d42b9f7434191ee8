"""
Built-in scene presets.

Each preset uses a handful of primitives with distinct saturated albedos so
the per-channel statistics of a render are informative.
"""

from typing import Callable, Dict, List

from ..errors import ConfigError
from .scene import Primitive


def spheres_preset() -> List[Primitive]:
    """Four colored spheres resting on a pale slab."""
    return [
        Primitive("box", (0.0, -0.8, 0.0), (0.9, 0.1, 0.9), (0.8, 0.8, 0.75), 60.0),
        Primitive("sphere", (-0.4, -0.35, -0.3), 0.35, (0.85, 0.15, 0.1)),
        Primitive("sphere", (0.45, -0.4, -0.25), 0.3, (0.1, 0.7, 0.2)),
        Primitive("sphere", (0.0, -0.4, 0.45), 0.3, (0.15, 0.25, 0.85)),
        Primitive("sphere", (0.1, 0.2, 0.0), 0.25, (0.9, 0.8, 0.15)),
    ]


def boxes_preset() -> List[Primitive]:
    """Stacked blocks with one sphere."""
    return [
        Primitive("box", (0.0, -0.8, 0.0), (0.9, 0.1, 0.9), (0.7, 0.7, 0.7), 60.0),
        Primitive("box", (-0.4, -0.45, -0.2), (0.25, 0.25, 0.25), (0.8, 0.2, 0.6)),
        Primitive("box", (0.35, -0.5, 0.3), (0.2, 0.2, 0.3), (0.2, 0.6, 0.8)),
        Primitive("box", (0.3, -0.1, -0.35), (0.15, 0.2, 0.15), (0.9, 0.5, 0.1)),
        Primitive("sphere", (-0.3, 0.05, 0.35), 0.2, (0.3, 0.8, 0.3)),
    ]


def gray_room_preset() -> List[Primitive]:
    """Neutral floor and back wall with two gray objects; gray-world holds by construction."""
    return [
        Primitive("box", (0.0, -0.85, 0.0), (0.9, 0.1, 0.9), (0.6, 0.6, 0.6), 60.0),
        Primitive("box", (0.0, 0.0, -0.85), (0.9, 0.9, 0.1), (0.5, 0.5, 0.5), 60.0),
        Primitive("sphere", (-0.3, -0.4, 0.2), 0.35, (0.7, 0.7, 0.7)),
        Primitive("box", (0.4, -0.5, 0.1), (0.2, 0.25, 0.2), (0.4, 0.4, 0.4)),
    ]


PRESETS: Dict[str, Callable[[], List[Primitive]]] = {
    "spheres": spheres_preset,
    "boxes": boxes_preset,
    "gray_room": gray_room_preset,
}


def get_preset(name: str) -> List[Primitive]:
    """
    Look up a preset by name.

    Raises:
        ConfigError: If the name is not a known preset
    """
    try:
        return PRESETS[name]()
    except KeyError:
        raise ConfigError(
            f"unknown scene preset '{name}', available: {', '.join(sorted(PRESETS))}"
        ) from None
