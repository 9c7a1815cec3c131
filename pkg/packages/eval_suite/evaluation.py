"""
Checkpoint evaluation on a dataset.

Batches fan out over worker threads (capped by TAGGER_THREADS); results are
reduced in batch order so reports do not depend on scheduling.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from pydantic import BaseModel, Field

from packages.autodiff import Stream, make_rng
from packages.data_foundry import DatasetBundle
from packages.ladder import TaggerParams
from packages.structured_logging import get_logger
from packages.tag_mechanism import CorruptionSpec, tagger_forward
from packages.tagger_settings import get_tagger_settings

from .errors import EvaluationError
from .models import EvaluationReport, IterationScores, TopKScoring
from .scoring import ami, segmentation_from_masks, top2_error

logger = get_logger(__name__)


class EvaluationOptions(BaseModel):
    """How a checkpoint is run for evaluation."""

    groups: int = Field(..., description="K at test time", ge=1)
    iterations: int = Field(..., description="T at test time", ge=1)
    corruption: CorruptionSpec = Field(..., description="Noise model entering the likelihoods")
    batch_size: int = Field(default=100, ge=1)
    seed: int = Field(default=0, description="Seed of the initial-mask streams", ge=0)
    stream: int = Field(default=Stream.EVALUATION, description="Batch i draws from (stream, i)", ge=0)
    eval_keep_sigma: bool = Field(default=True, description="Keep σ (or β) in the likelihood on clean input")
    threads: int | None = Field(default=None, description="Worker cap; TAGGER_THREADS when unset", ge=1)
    ablate: int | None = Field(default=None, description="Group removed at the last iteration", ge=0)
    score_ami: bool = Field(default=True)
    score_classes: bool = Field(default=True)
    scoring: TopKScoring = Field(default="set")

    model_config = {"frozen": True}


@dataclass
class _BatchOutcome:
    size: int
    costs: list[float]
    ami_sums: list[float] = field(default_factory=list)
    ami_counts: list[int] = field(default_factory=list)
    unscorable: int = 0
    predictions: np.ndarray | None = None


def _evaluate_batch(
    index: int,
    rows: np.ndarray,
    params: TaggerParams,
    dataset: DatasetBundle,
    options: EvaluationOptions,
    with_ami: bool,
    with_classes: bool,
) -> _BatchOutcome:
    trajectory = tagger_forward(
        dataset.inputs[rows],
        params,
        options.groups,
        options.iterations,
        options.corruption,
        training=False,
        rng=make_rng(options.seed, options.stream, index),
        ablate=options.ablate,
        eval_keep_sigma=options.eval_keep_sigma,
        with_class_head=with_classes,
    )
    outcome = _BatchOutcome(size=len(rows), costs=trajectory.cost_values())

    if with_ami:
        truth, ignore = dataset.labels[rows], dataset.ignore[rows]
        for state in trajectory.states[1:]:
            total, counted = 0.0, 0
            for example, partition in enumerate(segmentation_from_masks(state.m)):
                if ignore[example].all():
                    outcome.unscorable += 1
                    continue
                total += ami(truth[example], partition, ignore[example])
                counted += 1
            outcome.ami_sums.append(total)
            outcome.ami_counts.append(counted)

    if with_classes and trajectory.class_predictions is not None:
        outcome.predictions = trajectory.class_predictions.data
    return outcome


def evaluate(
    params: TaggerParams,
    dataset: DatasetBundle,
    options: EvaluationOptions,
) -> EvaluationReport:
    """
    Per-iteration denoising cost and AMI, plus classification error when the
    model has a class head and the dataset carries classes.

    Evaluation feeds the clean input; costs are averaged per element and
    weighted by batch size.

    Raises:
        EvaluationError: The dataset is empty.
    """
    if dataset.count == 0:
        raise EvaluationError("dataset is empty")

    notices: list[str] = []
    with_ami = options.score_ami and bool(dataset.labels.any())
    if options.score_ami and not with_ami:
        notices.append("AMI skipped: dataset has no ground-truth group labels")
    with_classes = options.score_classes and params.has_class_head and dataset.has_class_labels
    if options.score_classes and params.has_class_head and not dataset.has_class_labels:
        notices.append("classification skipped: dataset has no class labels")

    batches = [
        np.arange(start, min(start + options.batch_size, dataset.count))
        for start in range(0, dataset.count, options.batch_size)
    ]
    threads = options.threads or get_tagger_settings().threads
    with ThreadPoolExecutor(max_workers=min(threads, len(batches))) as pool:
        outcomes = list(
            pool.map(
                lambda item: _evaluate_batch(
                    item[0], item[1], params, dataset, options, with_ami, with_classes
                ),
                enumerate(batches),
            )
        )

    rows: list[IterationScores] = []
    for i in range(options.iterations):
        cost = sum(o.costs[i] * o.size for o in outcomes) / dataset.count
        score = None
        if with_ami:
            counted = sum(o.ami_counts[i] for o in outcomes)
            score = sum(o.ami_sums[i] for o in outcomes) / counted if counted else None
        rows.append(IterationScores(iteration=i + 1, denoising_cost=cost, ami=score))

    if with_ami:
        unscorable = sum(o.unscorable for o in outcomes) // options.iterations
        if unscorable:
            notices.append(f"{unscorable} examples without scorable pixels were left out of AMI")

    error = None
    if with_classes:
        predictions = np.concatenate([o.predictions for o in outcomes if o.predictions is not None])
        error = top2_error(predictions, dataset.class_sets(), scoring=options.scoring)

    for notice in notices:
        logger.warning("evaluation_notice", notice=notice)
    logger.info(
        "evaluation_completed",
        examples=dataset.count,
        groups=options.groups,
        iterations=options.iterations,
        threads=threads,
        final_cost=rows[-1].denoising_cost,
        final_ami=rows[-1].ami,
        top_k_error=error,
    )
    return EvaluationReport(
        examples=dataset.count,
        groups=options.groups,
        iterations=rows,
        top_k_error=error,
        top_k_scoring=options.scoring if with_classes else None,
        ablated_group=options.ablate,
        notices=notices,
    )


def denoising_report(
    params: TaggerParams,
    dataset: DatasetBundle,
    eval_iterations: int,
    *,
    groups: int,
    corruption: CorruptionSpec,
    batch_size: int = 100,
    seed: int = 0,
    stream: int = Stream.EVALUATION,
    eval_keep_sigma: bool = True,
    threads: int | None = None,
) -> list[float]:
    """
    Average denoising cost C_i for i = 1..T_eval on held-out data.

    Returns:
        One value per iteration.
    """
    options = EvaluationOptions(
        groups=groups,
        iterations=eval_iterations,
        corruption=corruption,
        batch_size=batch_size,
        seed=seed,
        stream=stream,
        eval_keep_sigma=eval_keep_sigma,
        threads=threads,
        score_ami=False,
        score_classes=False,
    )
    return evaluate(params, dataset, options).denoising_costs


def format_report_tsv(report: EvaluationReport) -> str:
    """
    Tab-separated report: a per-iteration table, a blank line, then a
    metric/value table.
    """
    lines = ["iteration\tdenoising_cost\tami"]
    for row in report.iterations:
        score = "NA" if row.ami is None else f"{row.ami:.6f}"
        lines.append(f"{row.iteration}\t{row.denoising_cost:.6f}\t{score}")
    lines.append("")
    lines.append("metric\tvalue")
    lines.append(f"examples\t{report.examples}")
    lines.append(f"groups\t{report.groups}")
    if report.ablated_group is not None:
        lines.append(f"ablated_group\t{report.ablated_group}")
    if report.top_k_error is not None:
        lines.append(f"top2_error\t{report.top_k_error:.6f}")
        lines.append(f"top2_scoring\t{report.top_k_scoring}")
    return "\n".join(lines) + "\n"


def write_report(report: EvaluationReport, path: str | Path) -> Path:
    """Write the TSV report as UTF-8."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_report_tsv(report), encoding="utf-8")
    return path
