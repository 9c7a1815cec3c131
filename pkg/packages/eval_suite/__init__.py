"""Evaluation package: AMI segmentation scores, denoising cost reports and top-k classification error."""

from packages.eval_suite.errors import EvaluationError, PartitionLengthError, TruthSetError
from packages.eval_suite.evaluation import (
    EvaluationOptions,
    denoising_report,
    evaluate,
    format_report_tsv,
    write_report,
)
from packages.eval_suite.models import EvaluationReport, IterationScores, Partition, TopKScoring
from packages.eval_suite.scoring import (
    ami,
    entropy,
    expected_mutual_information,
    segmentation_from_masks,
    top2_error,
)

__all__ = [
    # Models
    "EvaluationReport",
    "IterationScores",
    "Partition",
    "TopKScoring",
    # Scores
    "ami",
    "entropy",
    "expected_mutual_information",
    "segmentation_from_masks",
    "top2_error",
    # Reports
    "EvaluationOptions",
    "denoising_report",
    "evaluate",
    "format_report_tsv",
    "write_report",
    # Errors
    "EvaluationError",
    "PartitionLengthError",
    "TruthSetError",
]
