"""
Finite-difference gradient suites.

Each suite compares analytic gradients from the tape with central
differences and returns one CheckResult per case. The ``gradcheck``
command runs them and fails on any tolerance breach.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import numpy as np

from .autodiff import Tensor, concat, cumsum_exclusive, grad_check, index
from .field import FieldConfig, FieldParams, init_field_params
from .objective import (
    LossConfig,
    chromatic_adaptation_loss,
    data_loss,
    objective,
    smoothness_loss,
)
from .render import camera_rays, render_rays
from .synthscene import intrinsics_for, look_at

logger = logging.getLogger(__name__)

AUTODIFF_TOLERANCE = 1e-4
LOSS_TOLERANCE = 1e-3
RENDER_TOLERANCE = 1e-3
FD_STEP = 1e-5


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    error: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.error < self.tolerance


Case = Tuple[str, Callable[..., Tensor], List[np.ndarray]]


def _run(suite: str, cases: List[Case], tolerance: float) -> List[CheckResult]:
    results = []
    for name, fn, arrays in cases:
        error = grad_check(fn, [Tensor(a) for a in arrays], step=FD_STEP)
        result = CheckResult(suite, name, error, tolerance)
        logger.debug("%s/%s: max rel error %.3e", suite, name, error)
        results.append(result)
    return results


def autodiff_cases(rng: np.random.Generator) -> List[CheckResult]:
    """Every differentiable primitive on random inputs."""
    a = rng.normal(size=(3, 4))
    b = rng.normal(size=(3, 4))
    row = rng.normal(size=(4,))
    positive = rng.uniform(0.5, 2.0, size=(3, 4))
    # keep relu inputs clear of the kink
    away = rng.uniform(0.2, 1.0, size=(3, 4)) * rng.choice([-1.0, 1.0], size=(3, 4))
    w = rng.normal(size=(4, 2))

    cases: List[Case] = [
        ("add_broadcast", lambda x, y: (x + y).square().sum(), [a, row]),
        ("sub", lambda x, y: (x - y).square().sum(), [a, b]),
        ("mul_broadcast", lambda x, y: (x * y).sum(), [a, row]),
        ("div", lambda x, y: (x / y).sum(), [a, positive]),
        ("matmul", lambda x, y: (x @ y).square().sum(), [a, w]),
        ("exp", lambda x: x.exp().sum(), [a]),
        ("log", lambda x: x.log().sum(), [positive]),
        ("relu", lambda x: x.relu().square().sum(), [away]),
        ("sigmoid", lambda x: x.sigmoid().sum(), [a]),
        ("softplus", lambda x: x.softplus().sum(), [a]),
        ("mean_axis", lambda x: x.mean(axis=0).square().sum(), [a]),
        ("sum_keepdims", lambda x: (x.sum(axis=1, keepdims=True) * x).sum(), [a]),
        ("reshape", lambda x: (x.reshape(4, 3) @ Tensor(w.T)).square().sum(), [a]),
        ("concat", lambda x, y: concat([x, y], axis=1).square().sum(), [a, b]),
        ("index", lambda x: index(x, (slice(None), slice(1, 3))).square().sum(), [a]),
        ("cumsum_exclusive", lambda x: cumsum_exclusive(x, axis=1).square().sum(), [a]),
    ]
    return _run("autodiff", cases, AUTODIFF_TOLERANCE)


def loss_cases(rng: np.random.Generator) -> List[CheckResult]:
    """Data, chromatic-adaptation and smoothness terms."""
    c_l = rng.uniform(0.05, 0.9, size=(8, 3))
    c_gt = rng.uniform(0.0, 0.5, size=(8, 3))
    colors = rng.uniform(0.05, 0.9, size=(8, 3))
    s = rng.uniform(0.5, 3.0, size=(8, 3))
    s_patch = rng.uniform(0.5, 3.0, size=(2, 2, 2, 3))
    c_patch = rng.uniform(0.05, 0.9, size=(2, 2, 2, 3))

    cases: List[Case] = [
        ("data", lambda x: data_loss(x, c_gt, 1e-3), [c_l]),
        ("chromatic_adaptation", lambda x: chromatic_adaptation_loss(x, colors), [s]),
        ("smoothness_cross", lambda x: smoothness_loss(x, c_patch, pairing="cross"), [s_patch]),
        ("smoothness_same", lambda x: smoothness_loss(x, c_patch, pairing="same"), [s_patch]),
    ]
    return _run("losses", cases, LOSS_TOLERANCE)


def _tiny_field(seed: int) -> FieldParams:
    config = FieldConfig(
        position_frequencies=2,
        direction_frequencies=1,
        trunk_depth=2,
        trunk_width=8,
        head_width=8,
    )
    return init_field_params(config, seed=seed)


def render_cases(rng: np.random.Generator, seed: int = 0) -> List[CheckResult]:
    """
    Full objective over one 2x2 patch of rays, differentiated with respect
    to the output layers of the density, color and response heads.
    """
    params = _tiny_field(seed)
    pose = look_at(np.array([0.0, 0.5, 3.0]), np.zeros(3))
    rays = camera_rays(pose, intrinsics_for(8, 8, 40.0), 8, 8, 1.5, 4.5,
                       pixels=np.array([[3, 3], [3, 4], [4, 3], [4, 4]]))
    targets = rng.uniform(0.01, 0.2, size=(4, 3))
    loss_cfg = LossConfig()

    def end_to_end(name: str) -> Callable[[Tensor], Tensor]:
        def fn(probe: Tensor) -> Tensor:
            tensors: Dict[str, Tensor] = dict(params.tensors)
            tensors[name] = probe
            out = render_rays(FieldParams(params.config, tensors), rays, 16)
            loss, _ = objective(out.color_low, out.response, targets, loss_cfg, 2)
            return loss

        return fn

    cases: List[Case] = [
        (f"objective[{name}]", end_to_end(name), [params[name].data.copy()])
        for name in ("trunk.sigma.w", "color.1.w", "response.1.w", "response.1.b")
    ]
    return _run("render", cases, RENDER_TOLERANCE)


SUITES: Dict[str, Callable[[np.random.Generator], List[CheckResult]]] = {
    "autodiff": autodiff_cases,
    "losses": loss_cases,
    "render": render_cases,
}
CASE_CHOICES = ("all",) + tuple(SUITES)


def run_checks(cases: str = "all", seed: int = 0) -> List[CheckResult]:
    """
    Run one suite or all of them.

    Args:
        cases: ``all`` or a suite name
        seed: Seed for the random inputs

    Returns:
        Results in suite order
    """
    if cases not in CASE_CHOICES:
        raise ValueError(f"unknown check suite '{cases}', expected one of {CASE_CHOICES}")
    names = list(SUITES) if cases == "all" else [cases]
    results: List[CheckResult] = []
    for name in names:
        results.extend(SUITES[name](np.random.default_rng([seed, list(SUITES).index(name)])))
    return results
