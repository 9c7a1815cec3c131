"""
Unsupervised and semi-supervised training of the Tagger.

Gradients come from backpropagation through the T unrolled iterations; one
Adam optimizer owns the parameters. Each epoch draws its shuffling,
corruption and initial masks from its own stream, so a resumed run repeats
exactly the epochs an uninterrupted run would have made.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from packages.autodiff import Graph, Stream, Tensor, backward, log, make_rng, sum_
from packages.data_foundry import NO_CLASS, DatasetBundle
from packages.eval_suite import denoising_report
from packages.ladder import TaggerParams
from packages.structured_logging import get_logger
from packages.tag_mechanism import class_predictions_per_iteration, tagger_forward

from .checkpoint import Checkpoint, save_checkpoint
from .errors import ConfigLoadError, LabelDataError, NonFiniteGradientError, TrainingDivergedError
from .models import EpochMetrics, TrainConfig, TrainingPhase
from .optimizer import OptimizerState, adam_step

logger = get_logger(__name__)

PROBABILITY_FLOOR = 1e-12


def metrics_header(eval_iterations: int) -> list[str]:
    """Columns of the per-epoch metrics file."""
    return [
        "epoch",
        "phase",
        "step",
        "train_cost",
        "class_cost",
        *[f"val_cost_{i}" for i in range(1, eval_iterations + 1)],
    ]


def class_cross_entropy(predictions: Tensor, targets: np.ndarray, weights: np.ndarray) -> Tensor:
    """
    −Σ_b w_b Σ_c t_bc log p_bc.

    Args:
        predictions: Combined class distributions [B, C].
        targets: Target distributions [B, C].
        weights: Row weights [B]; zero for unlabeled rows.
    """
    weighted_targets = targets * weights[:, None]
    return -sum_(log(predictions + PROBABILITY_FLOOR) * weighted_targets)


def split_validation(dataset: DatasetBundle, fraction: float) -> tuple[DatasetBundle, DatasetBundle | None]:
    """Hold out the last ``fraction`` of the examples."""
    held_out = int(math.floor(dataset.count * fraction))
    if held_out == 0 or held_out >= dataset.count:
        return dataset, None
    cut = dataset.count - held_out
    return dataset.subset(slice(0, cut)), dataset.subset(slice(cut, dataset.count))


def select_labeled_indices(dataset: DatasetBundle, budget: int, rng: np.random.Generator) -> np.ndarray:
    """
    Uniformly draw the examples whose class labels training may use.

    Returns:
        Sorted indices; all examples if the budget exceeds the dataset.

    Raises:
        LabelDataError: The dataset has no class labels or the budget is < 1.
    """
    if not dataset.has_class_labels:
        raise LabelDataError("dataset carries no class labels")
    if budget < 1:
        raise LabelDataError("label budget must be >= 1")
    if budget >= dataset.count:
        return np.arange(dataset.count)
    return np.sort(rng.choice(dataset.count, size=budget, replace=False))


def load_labeled_indices(path: str | Path) -> np.ndarray:
    """
    Read labeled example indices, one per line; ``#`` starts a comment.

    Raises:
        LabelDataError: A line is not a non-negative integer.
    """
    indices: list[int] = []
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = int(line)
        except ValueError as e:
            raise LabelDataError(f"{path}:{number}: '{line}' is not an example index") from e
        if value < 0:
            raise LabelDataError(f"{path}:{number}: negative example index")
        indices.append(value)
    return np.array(sorted(set(indices)), dtype=np.int64)


@dataclass
class TrainResult:
    """Outcome of a training run."""

    checkpoint: Checkpoint
    history: list[EpochMetrics] = field(default_factory=list)
    checkpoint_path: Path | None = None


class Trainer:
    """Owns the parameters, the optimizer and the epoch bookkeeping of one run."""

    def __init__(
        self,
        config: TrainConfig,
        params: TaggerParams,
        optimizer: OptimizerState | None = None,
        *,
        epochs_completed: int = 0,
        supervised_epochs_completed: int = 0,
        checkpoint_path: str | Path | None = None,
        metrics_path: str | Path | None = None,
    ) -> None:
        self.config = config
        self.params = params
        self.optimizer = optimizer or OptimizerState.for_params(params.params)
        self.epochs_completed = epochs_completed
        self.supervised_epochs_completed = supervised_epochs_completed
        self.checkpoint_path = Path(checkpoint_path) if checkpoint_path else None
        self.metrics_path = Path(metrics_path) if metrics_path else None
        self.last_checkpoint: Path | None = None
        self.history: list[EpochMetrics] = []
        self._fresh_metrics = epochs_completed + supervised_epochs_completed == 0

    @classmethod
    def fresh(cls, config: TrainConfig, dataset: DatasetBundle, **kwargs: object) -> Trainer:
        """New parameters sized for ``dataset``."""
        _check_dataset_mode(config, dataset)
        params = TaggerParams.initialize(
            config.ladder_config(dataset.elements),
            config.corruption_spec.input_mode,
            dataset.metadata.data_mean,
            make_rng(config.seed, Stream.PARAMS),
        )
        logger.info(
            "model_initialized",
            parameters=params.parameter_count,
            layer_sizes=list(config.layer_sizes),
            mode=params.mode,
        )
        return cls(config, params, **kwargs)  # type: ignore[arg-type]

    @classmethod
    def resume(cls, checkpoint: Checkpoint, config: TrainConfig, **kwargs: object) -> Trainer:
        """Continue from a checkpoint; step and epoch counters carry on."""
        checkpoint.check_compatible(config)
        trainer = cls(
            config,
            checkpoint.params,
            checkpoint.optimizer,
            epochs_completed=checkpoint.epochs_completed,
            supervised_epochs_completed=checkpoint.supervised_epochs_completed,
            **kwargs,  # type: ignore[arg-type]
        )
        logger.info(
            "training_resumed",
            step=checkpoint.optimizer.step,
            epochs_completed=checkpoint.epochs_completed,
            supervised_epochs_completed=checkpoint.supervised_epochs_completed,
        )
        return trainer

    @property
    def checkpoint(self) -> Checkpoint:
        return Checkpoint(
            params=self.params,
            optimizer=self.optimizer,
            config=self.config,
            epochs_completed=self.epochs_completed,
            supervised_epochs_completed=self.supervised_epochs_completed,
        )

    def train_step(
        self,
        x: np.ndarray,
        rng: np.random.Generator,
        targets: np.ndarray | None = None,
        weights: np.ndarray | None = None,
    ) -> tuple[float, float | None]:
        """
        One optimizer step on a batch.

        Args:
            x: Clean batch [B, N].
            rng: Stream for corruption and initial masks.
            targets: Class targets [B, C] in the supervised phase.
            weights: Per-row class-cost weights [B]; zero for unlabeled rows.

        Returns:
            (denoising cost averaged over iterations, class cross-entropy or None)

        Raises:
            TrainingDivergedError: The cost or a gradient is not finite.
        """
        config = self.config
        supervised = targets is not None and weights is not None
        with Graph() as graph:
            trajectory = tagger_forward(
                x,
                self.params,
                config.groups,
                config.train_iterations,
                config.corruption_spec,
                training=True,
                rng=rng,
                with_class_head=supervised,
                class_cost_iterations=config.class_cost_iterations,
            )
            loss = trajectory.mean_cost
            class_cost: Tensor | None = None
            if supervised and config.class_weight > 0.0 and float(weights.sum()) > 0.0:
                assert targets is not None and weights is not None
                terms = [
                    class_cross_entropy(p, targets, weights)
                    for p in class_predictions_per_iteration(trajectory)
                ]
                class_cost = terms[0]
                for term in terms[1:]:
                    class_cost = class_cost + term
                class_cost = class_cost / float(len(terms))
                loss = loss + class_cost * config.class_weight

        cost_value = trajectory.mean_cost.item()
        if not math.isfinite(loss.item()):
            raise TrainingDivergedError(
                f"training cost became {loss.item()} at step {self.optimizer.step + 1}",
                self.last_checkpoint,
            )

        grads = backward(graph, loss, self.params.params)
        try:
            adam_step(
                self.params.params,
                grads,
                self.optimizer,
                lr=config.learning_rate,
                beta1=config.adam_beta1,
                beta2=config.adam_beta2,
                eps=config.adam_epsilon,
            )
        except NonFiniteGradientError as e:
            raise TrainingDivergedError(str(e), self.last_checkpoint) from e
        return cost_value, None if class_cost is None else class_cost.item()

    def validate(self, validation: DatasetBundle | None) -> list[float]:
        """Per-iteration denoising cost on held-out data (clean input)."""
        if validation is None or validation.count == 0:
            return []
        return denoising_report(
            self.params,
            validation,
            self.config.eval_iterations,
            groups=self.config.groups,
            corruption=self.config.corruption_spec,
            batch_size=self.config.batch_size,
            seed=self.config.seed,
            stream=Stream.VALIDATION,
            eval_keep_sigma=self.config.eval_keep_sigma,
        )

    def run_epoch(
        self,
        train: DatasetBundle,
        phase: TrainingPhase,
        validation: DatasetBundle | None = None,
        labeled: np.ndarray | None = None,
    ) -> EpochMetrics:
        """Shuffle, step through all batches, validate, checkpoint and log."""
        config = self.config
        epoch_index = self.epochs_completed + self.supervised_epochs_completed
        rng = make_rng(config.seed, Stream.EPOCH, epoch_index)
        order = rng.permutation(train.count)

        labeled_mask = np.zeros(train.count, dtype=bool)
        if labeled is not None:
            labeled_mask[labeled] = True
        targets_all = None
        if phase == "supervised":
            # Only labeled rows are read; unlabeled class ids may be anything.
            targets_all = np.zeros((train.count, config.class_count))
            rows_with_labels = np.flatnonzero(labeled_mask)
            targets_all[rows_with_labels] = train.subset(rows_with_labels).class_targets(config.class_count)

        cost_total, class_total, class_batches, seen = 0.0, 0.0, 0, 0
        for start in range(0, train.count, config.batch_size):
            rows = order[start : start + config.batch_size]
            if config.normalization == "batch" and len(rows) < 2:
                continue
            targets = weights = None
            if targets_all is not None:
                row_labeled = labeled_mask[rows].astype(np.float64)
                count = row_labeled.sum()
                weights = row_labeled / count if count else row_labeled
                targets = targets_all[rows]
            cost, class_cost = self.train_step(train.inputs[rows], rng, targets, weights)
            cost_total += cost * len(rows)
            seen += len(rows)
            if class_cost is not None:
                class_total += class_cost
                class_batches += 1

        if phase == "unsupervised":
            self.epochs_completed += 1
        else:
            self.supervised_epochs_completed += 1

        metrics = EpochMetrics(
            epoch=self.epochs_completed + self.supervised_epochs_completed,
            phase=phase,
            step=self.optimizer.step,
            train_cost=cost_total / seen if seen else float("nan"),
            class_cost=class_total / class_batches if class_batches else None,
            validation_costs=self.validate(validation),
        )
        self.history.append(metrics)
        self._write_metrics(metrics)
        self.save()
        logger.info(
            "epoch_completed",
            epoch=metrics.epoch,
            phase=phase,
            step=metrics.step,
            train_cost=metrics.train_cost,
            class_cost=metrics.class_cost,
            val_costs=metrics.validation_costs,
        )
        return metrics

    def save(self) -> Path | None:
        if self.checkpoint_path is None:
            return None
        self.last_checkpoint = save_checkpoint(self.checkpoint_path, self.checkpoint)
        return self.last_checkpoint

    def _write_metrics(self, metrics: EpochMetrics) -> None:
        if self.metrics_path is None:
            return
        header = metrics_header(self.config.eval_iterations)
        new_file = self._fresh_metrics or not self.metrics_path.exists()
        self._fresh_metrics = False
        self.metrics_path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.metrics_path, "w" if new_file else "a", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, delimiter="\t", lineterminator="\n")
            if new_file:
                writer.writerow(header)
            val = [f"{c:.6f}" for c in metrics.validation_costs]
            val += ["NA"] * (len(header) - 5 - len(val))
            writer.writerow(
                [
                    metrics.epoch,
                    metrics.phase,
                    metrics.step,
                    f"{metrics.train_cost:.6f}",
                    "NA" if metrics.class_cost is None else f"{metrics.class_cost:.6f}",
                    *val,
                ]
            )


def _check_dataset_mode(config: TrainConfig, dataset: DatasetBundle) -> None:
    expected = config.corruption_spec.input_mode
    if dataset.metadata.mode != expected:
        raise ConfigLoadError(
            f"corruption '{config.corruption.value}' needs {expected} data, "
            f"dataset '{dataset.metadata.kind.value}' is {dataset.metadata.mode}"
        )


def _limit_examples(config: TrainConfig, dataset: DatasetBundle) -> DatasetBundle:
    if config.train_examples is None or config.train_examples >= dataset.count:
        return dataset
    return dataset.subset(slice(0, config.train_examples))


def _check_labels(config: TrainConfig, dataset: DatasetBundle, labeled: np.ndarray) -> None:
    if len(labeled) == 0:
        raise LabelDataError("labeled index set is empty")
    if not dataset.has_class_labels:
        raise LabelDataError("dataset carries no class labels")
    if labeled.min() < 0 or labeled.max() >= dataset.count:
        raise LabelDataError(f"labeled indices must lie in 0..{dataset.count - 1}")
    assert dataset.class_labels is not None
    classes = dataset.class_labels[labeled]
    present = classes[classes != NO_CLASS]
    if present.size and int(present.max()) >= config.class_count:
        raise LabelDataError(f"class label {int(present.max())} outside 0..{config.class_count - 1}")
    if (classes == NO_CLASS).all(axis=1).any():
        raise LabelDataError("a labeled example has no class")


def _trainer_for(
    config: TrainConfig,
    dataset: DatasetBundle,
    resume_from: Checkpoint | None,
    checkpoint_path: str | Path | None,
    metrics_path: str | Path | None,
) -> Trainer:
    if resume_from is not None:
        _check_dataset_mode(config, dataset)
        return Trainer.resume(
            resume_from, config, checkpoint_path=checkpoint_path, metrics_path=metrics_path
        )
    return Trainer.fresh(config, dataset, checkpoint_path=checkpoint_path, metrics_path=metrics_path)


def train_unsupervised(
    config: TrainConfig,
    dataset: DatasetBundle,
    *,
    validation: DatasetBundle | None = None,
    checkpoint_path: str | Path | None = None,
    metrics_path: str | Path | None = None,
    resume_from: Checkpoint | None = None,
) -> TrainResult:
    """
    Minimize the denoising cost averaged over iterations; labels are ignored.

    Without an explicit validation set the last ``validation_fraction`` of
    the examples is held out.

    Raises:
        TrainingDivergedError: The cost or a gradient stopped being finite.
    """
    train = _limit_examples(config, dataset)
    if validation is None:
        train, validation = split_validation(train, config.validation_fraction)
    trainer = _trainer_for(config, train, resume_from, checkpoint_path, metrics_path)

    for _ in range(max(0, config.epochs - trainer.epochs_completed)):
        trainer.run_epoch(train, "unsupervised", validation)

    if trainer.last_checkpoint is None:
        trainer.save()
    return TrainResult(trainer.checkpoint, trainer.history, trainer.last_checkpoint)


def train_semisupervised(
    config: TrainConfig,
    dataset: DatasetBundle,
    labeled_indices: np.ndarray,
    *,
    validation: DatasetBundle | None = None,
    checkpoint_path: str | Path | None = None,
    metrics_path: str | Path | None = None,
    resume_from: Checkpoint | None = None,
) -> TrainResult:
    """
    Unsupervised phase, then the class head is added and the class
    cross-entropy (weighted by ``class_weight``) joins the denoising cost.
    Unlabeled examples contribute only the denoising cost.

    Args:
        labeled_indices: Examples of ``dataset`` whose classes may be used.

    Raises:
        LabelDataError: Empty labeled set or labels outside the class range.
        TrainingDivergedError: The cost or a gradient stopped being finite.
    """
    labeled_indices = np.asarray(labeled_indices, dtype=np.int64)
    _check_labels(config, dataset, labeled_indices)

    train = _limit_examples(config, dataset)
    if validation is None:
        train, validation = split_validation(train, config.validation_fraction)
    labeled = labeled_indices[labeled_indices < train.count]
    if len(labeled) == 0:
        raise LabelDataError("no labeled examples remain after holding out validation data")
    trainer = _trainer_for(config, train, resume_from, checkpoint_path, metrics_path)

    for _ in range(max(0, config.epochs - trainer.epochs_completed)):
        trainer.run_epoch(train, "unsupervised", validation)

    if not trainer.params.has_class_head:
        trainer.params.add_class_head(config.class_count, make_rng(config.seed, Stream.CLASS_HEAD))
        trainer.optimizer.ensure(trainer.params.params)
        logger.info("class_head_added", classes=config.class_count, labeled=len(labeled))

    for _ in range(max(0, config.supervised_epochs - trainer.supervised_epochs_completed)):
        trainer.run_epoch(train, "supervised", validation, labeled)

    if trainer.last_checkpoint is None:
        trainer.save()
    return TrainResult(trainer.checkpoint, trainer.history, trainer.last_checkpoint)
