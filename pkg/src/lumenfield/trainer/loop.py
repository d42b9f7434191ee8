"""
Training loop: one differentiable step, the stepper around it, checkpoints
and the CSV loss log.

Every step draws its randomness from a generator seeded with
``(seed, step)``, so a run resumed from a checkpoint replays exactly the
batches and jitter of the uninterrupted run.
"""

import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
from tqdm import tqdm

from ..autodiff import Graph, backward, load_tensors, save_tensors
from ..errors import CheckpointError, NonFiniteError, TrainingDivergedError
from ..field import FieldParams, init_field_params
from ..objective import LossBreakdown, objective
from ..render import RayBatch, render_rays
from ..synthscene import LowLightDataset
from .batching import gather_targets, sample_ray_patches
from .config import RunConfig
from .optim import AdamOptimizer, lr_schedule

logger = logging.getLogger(__name__)

LOG_NAME = "train_log.csv"
LOG_COLUMNS = ("step", "data", "ca", "smooth", "total", "lr")


def step_generator(seed: int, step: int) -> np.random.Generator:
    """Independent random stream for one optimization step."""
    return np.random.default_rng([seed, step])


def train_step(
    params: FieldParams,
    batch: RayBatch,
    targets: np.ndarray,
    run: RunConfig,
    optimizer: AdamOptimizer,
    rng: np.random.Generator,
    lr: float,
    step: int = 0,
) -> Tuple[FieldParams, LossBreakdown]:
    """
    Forward, backward and one Adam update.

    Args:
        params: Field weights, updated in place
        batch: Patch-structured rays
        targets: Observed colors under the rays, (R, 3)
        run: Run configuration
        optimizer: Adam state over ``params``
        rng: Generator for stratified jitter
        lr: Learning rate for this update
        step: Step index, reported when training diverges

    Returns:
        (params, LossBreakdown of the pre-update loss)

    Raises:
        TrainingDivergedError: If any value on the tape becomes non-finite
    """
    if batch.patch_side != run.loss.s_patch:
        raise ValueError(
            f"batch patch side {batch.patch_side} does not match loss.s_patch {run.loss.s_patch}"
        )
    params.zero_grad()
    try:
        with Graph():
            out = render_rays(params, batch, run.train.n_samples, jitter=True, rng=rng)
            loss, breakdown = objective(
                out.color_low, out.response, targets, run.loss, run.loss.s_patch
            )
            backward(loss)
    except NonFiniteError as exc:
        norms = {name: float(np.linalg.norm(t.data)) for name, t in params.parameters()}
        diagnostics = {"lr": lr, "max_param_norm": max(norms.values())}
        raise TrainingDivergedError(step, diagnostics) from exc
    optimizer.step(lr)
    return params, breakdown


class Trainer:
    """
    Stepper over a dataset with checkpointing and a CSV log.

    ``out_dir`` may be None for in-memory runs (tests, sweeps).
    """

    def __init__(
        self,
        dataset: LowLightDataset,
        config: RunConfig,
        out_dir: Optional[Union[str, Path]] = None,
        params: Optional[FieldParams] = None,
    ):
        self.dataset = dataset
        self.config = config
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.params = params or init_field_params(config.field, seed=config.train.seed)
        self.optimizer = AdamOptimizer(self.params, config.train)
        self.step = 0
        self.history: List[LossBreakdown] = []
        if self.out_dir is not None:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    @property
    def log_path(self) -> Optional[Path]:
        return self.out_dir / LOG_NAME if self.out_dir is not None else None

    def train_one(self) -> LossBreakdown:
        """Run the next optimization step."""
        cfg = self.config.train
        rng = step_generator(cfg.seed, self.step)
        batch = sample_ray_patches(self.dataset.manifest, cfg, rng)
        targets = gather_targets(self.dataset, batch)
        lr = lr_schedule(self.step, cfg)
        _, breakdown = train_step(
            self.params, batch, targets, self.config, self.optimizer, rng, lr, self.step
        )
        self.step += 1
        self.history.append(breakdown)
        if self.step % cfg.log_interval == 0 or self.step == cfg.steps:
            self._log(breakdown, lr)
        if self.out_dir is not None and (
            self.step % cfg.checkpoint_interval == 0 or self.step == cfg.steps
        ):
            self.save_checkpoint()
        return breakdown

    def run(self, steps: Optional[int] = None, progress: bool = True) -> List[LossBreakdown]:
        """
        Train until ``steps`` (default: the configured total) have completed.

        Returns:
            Breakdowns of the steps run by this call
        """
        target = self.config.train.steps if steps is None else min(steps, self.config.train.steps)
        start = self.step
        if target <= start:
            logger.info("nothing to do: already at step %d", start)
            return []
        logger.info("training steps %d..%d", start, target)
        results = []
        with tqdm(total=target, initial=start, desc="train", unit="step", disable=not progress) as bar:
            while self.step < target:
                breakdown = self.train_one()
                results.append(breakdown)
                bar.update(1)
                bar.set_postfix(loss=f"{breakdown.total:.4g}")
        return results

    def _log(self, breakdown: LossBreakdown, lr: float) -> None:
        logger.info(
            "step %d: data=%.5g ca=%.5g smooth=%.5g total=%.5g lr=%.3g",
            self.step, breakdown.data, breakdown.ca, breakdown.smooth, breakdown.total, lr,
        )
        if self.log_path is None:
            return
        new_file = not self.log_path.exists()
        with open(self.log_path, "a", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            if new_file:
                writer.writerow(LOG_COLUMNS)
            writer.writerow([self.step, *(repr(v) for v in breakdown.as_row()), repr(lr)])

    def _trim_log(self, step: int) -> None:
        """Drop log rows written after ``step`` by an interrupted run."""
        if self.log_path is None or not self.log_path.exists():
            return
        with open(self.log_path, "r", newline="", encoding="utf-8") as f:
            rows = list(csv.reader(f))
        if not rows:
            return
        kept = [rows[0]] + [r for r in rows[1:] if r and int(r[0]) <= step]
        with open(self.log_path, "w", newline="", encoding="utf-8") as f:
            csv.writer(f).writerows(kept)

    def checkpoint_arrays(self) -> Dict[str, np.ndarray]:
        arrays = dict(self.params.arrays())
        arrays.update(self.optimizer.state_arrays())
        arrays["meta.step"] = np.array(float(self.step))
        arrays["rng.seed"] = np.array(float(self.config.train.seed))
        return arrays

    def save_checkpoint(self, path: Optional[Union[str, Path]] = None) -> Path:
        """Write params, optimizer moments and the step counter."""
        if path is None:
            if self.out_dir is None:
                raise ValueError("no output directory to place the checkpoint in")
            path = self.out_dir / f"checkpoint_{self.step:06d}.lfck"
        path = Path(path)
        arrays = self.checkpoint_arrays()
        save_tensors(path, arrays)
        if self.out_dir is not None:
            save_tensors(self.out_dir / "latest.lfck", arrays)
        logger.debug("saved checkpoint %s", path)
        return path

    def resume(self, path: Union[str, Path]) -> None:
        """
        Restore params, optimizer and step from a checkpoint.

        Raises:
            CheckpointError: If the checkpoint was written with a different seed
        """
        arrays = load_tensors(path)
        if "meta.step" not in arrays:
            raise CheckpointError(f"{path} is a weights-only checkpoint, cannot resume from it")
        seed = int(arrays.get("rng.seed", np.array(-1.0)))
        if seed != self.config.train.seed:
            raise CheckpointError(
                f"{path} was written with seed {seed}, run is configured with {self.config.train.seed}"
            )
        self.params = FieldParams.from_arrays(self.config.field, arrays)
        self.optimizer = AdamOptimizer(self.params, self.config.train)
        self.optimizer.load_state_arrays(arrays)
        self.step = int(arrays["meta.step"])
        self._trim_log(self.step)
        logger.info("resumed from %s at step %d", path, self.step)
