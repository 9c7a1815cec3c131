"""
Desk-scale acceptance runs on Shapes.

Tests cover:
- Validation denoising cost falling over inference iterations after training
- Grouping quality (AMI) against an untrained model
- Evaluation at other K and T than the model was trained with

These train for 30 epochs on 5,000 images; select them with ``-m slow``.
"""

import numpy as np
import pytest

from packages.autodiff import make_rng
from packages.data_foundry import generate_shapes_splits
from packages.eval_suite import EvaluationOptions, evaluate
from packages.tag_mechanism import tagger_forward
from packages.train_engine import Trainer, build_train_config, train_unsupervised

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def config():
    return build_train_config("desk_shapes", {"epochs": 30})


@pytest.fixture(scope="module")
def splits():
    return generate_shapes_splits(0, counts={"train": 5000, "test": 500})


@pytest.fixture(scope="module")
def trained(config, splits):
    return train_unsupervised(config, splits["train"], validation=splits["test"]).checkpoint.params


def options(config, groups: int = 4, iterations: int = 5) -> EvaluationOptions:
    return EvaluationOptions(groups=groups, iterations=iterations, corruption=config.corruption_spec)


class TestIterativeInference:
    """Refinement over iterations on held-out images."""

    def test_cost_decreases_over_iterations(self, config, splits, trained):
        costs = evaluate(trained, splits["test"], options(config)).denoising_costs
        assert costs[0] > costs[1] > costs[2]
        for earlier, later in zip(costs[2:], costs[3:], strict=False):
            assert later <= earlier * 1.05

    def test_training_lowers_validation_cost(self, config, splits, trained):
        untrained = Trainer.fresh(config, splits["train"]).params
        before = evaluate(untrained, splits["test"], options(config)).denoising_costs[-1]
        after = evaluate(trained, splits["test"], options(config)).denoising_costs[-1]
        assert after < before


class TestGrouping:
    """AMI on foreground pixels outside overlaps."""

    def test_beats_untrained_model(self, config, splits, trained):
        untrained = Trainer.fresh(config, splits["train"]).params
        chance = evaluate(untrained, splits["test"], options(config)).final_ami
        learned = evaluate(trained, splits["test"], options(config)).final_ami
        assert chance < 0.05
        assert learned >= 0.35
        assert learned >= 10 * max(chance, 0.0)

    @pytest.mark.parametrize(("groups", "iterations"), [(2, 5), (4, 5)])
    def test_other_groups_and_iterations(self, config, splits, trained, groups, iterations):
        report = evaluate(trained, splits["test"], options(config, groups, iterations))
        assert len(report.iterations) == iterations
        assert all(np.isfinite(report.denoising_costs))

        batch = splits["test"].inputs[:20]
        traj = tagger_forward(
            batch,
            trained,
            groups,
            iterations,
            config.corruption_spec,
            training=False,
            rng=make_rng(0),
        )
        for state in traj.states:
            np.testing.assert_allclose(state.m.data.sum(axis=1), 1.0, atol=1e-6)
            assert state.m.data.min() >= 0.0
