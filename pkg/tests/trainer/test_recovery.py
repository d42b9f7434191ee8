"""
Reduced-scale end-to-end checks: the learned response moves toward the
inverse degradation, and the full objective beats the ablated baseline.

One small dataset (10 views, 24x24, default dimming and tint) is trained
twice for 3000 steps, so the whole module is marked slow.
"""

import numpy as np
import pytest

from src.lumenfield.field import FieldConfig
from src.lumenfield.metrics import psnr, response_recovery_score
from src.lumenfield.rawproc import to_srgb
from src.lumenfield.synthscene import SynthesizeConfig, read_dataset, synthesize_dataset
from src.lumenfield.trainer import RunConfig, TrainConfig, Trainer, render_views

pytestmark = pytest.mark.slow

RUN = RunConfig(
    train=TrainConfig(steps=3000),
    field=FieldConfig(trunk_depth=3, trunk_width=64),
)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    root = tmp_path_factory.mktemp("recovery")
    synthesize_dataset(SynthesizeConfig(views=10, width=24, height=24), root)
    return read_dataset(root)


def _train_and_render(dataset, run):
    trainer = Trainer(dataset, run)
    trainer.run(progress=False)
    renders = render_views(trainer.params, dataset.manifest, run, indices=dataset.manifest.test_indices)
    return trainer, renders


def _mean_response(renders):
    means = [m for m in (r.mean_response() for r in renders) if m is not None]
    assert means, "no rendered pixel is covered"
    return np.mean(means, axis=0)


def _mean_psnr(dataset, renders):
    return float(np.mean([
        psnr(to_srgb(r.enhanced), to_srgb(dataset.ground_truth(r.index))) for r in renders
    ]))


@pytest.fixture(scope="module")
def full(dataset):
    return _train_and_render(dataset, RUN)


@pytest.fixture(scope="module")
def baseline(dataset):
    return _train_and_render(dataset, RUN.with_ablation("baseline"))


class TestRecovery:

    def test_training_converges(self, full):
        trainer, _ = full
        totals = [b.total for b in trainer.history]
        assert np.mean(totals[-100:]) < 0.25 * np.mean(totals[:100])

    def test_response_closer_to_oracle_than_unit_response(self, dataset, full, baseline):
        oracle = dataset.manifest.degradation.oracle_response
        learned = response_recovery_score(_mean_response(full[1]), oracle)
        frozen = response_recovery_score(_mean_response(baseline[1]), oracle)
        assert max(learned) < max(frozen)
        assert np.mean(learned) < np.mean(frozen)

    def test_learned_response_follows_tint_order(self, dataset, full):
        """The blue-tinted capture needs the smallest blue gain, red the largest."""
        response = _mean_response(full[1])
        oracle = dataset.manifest.degradation.oracle_response
        assert np.argmax(response) == np.argmax(oracle)
        assert np.argmin(response) == np.argmin(oracle)

    def test_full_beats_baseline_psnr(self, dataset, full, baseline):
        assert _mean_psnr(dataset, full[1]) > _mean_psnr(dataset, baseline[1])
