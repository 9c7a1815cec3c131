"""
Segmentation and classification scores.

AMI follows the hypergeometric model of random labelings with fixed cluster
sizes and normalizes by the larger of the two entropies.
"""

from __future__ import annotations

from collections.abc import Collection, Sequence

import numpy as np
from scipy.special import gammaln
from sklearn.metrics import mutual_info_score
from sklearn.metrics.cluster import contingency_matrix

from packages.autodiff import Tensor

from .errors import EvaluationError, PartitionLengthError, TruthSetError
from .models import Partition, TopKScoring

DENOMINATOR_FLOOR = 1e-12


def segmentation_from_masks(m: Tensor | np.ndarray) -> list[Partition]:
    """
    Harden group assignments [B, K, N] into one partition per example.

    Each element takes the group with the largest mask value; ties go to
    the smallest group index.
    """
    data = m.data if isinstance(m, Tensor) else np.asarray(m)
    if data.ndim != 3:
        raise ValueError(f"expected masks [B, K, N], got shape {data.shape}")
    return [Partition(labels=row) for row in np.argmax(data, axis=1)]


def _as_labels(partition: Partition | np.ndarray | Sequence[int]) -> np.ndarray:
    if isinstance(partition, Partition):
        return partition.labels
    return Partition(labels=np.asarray(partition)).labels


def entropy(counts: np.ndarray) -> float:
    """Shannon entropy (nats) of a cluster-size vector."""
    counts = counts[counts > 0].astype(np.float64)
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(-np.sum(p * np.log(p)))


def expected_mutual_information(contingency: np.ndarray) -> float:
    """
    E[MI] between two labelings drawn uniformly at random with the row and
    column sums of ``contingency`` fixed.
    """
    a = contingency.sum(axis=1).astype(np.int64)
    b = contingency.sum(axis=0).astype(np.int64)
    n = int(a.sum())
    if n == 0:
        return 0.0

    log_fact_n = gammaln(n + 1)
    row_terms = gammaln(a + 1) + gammaln(n - a + 1)
    col_terms = gammaln(b + 1) + gammaln(n - b + 1)

    emi = 0.0
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            lo, hi = max(1, ai + bj - n), min(ai, bj)
            if lo > hi:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            log_prob = (
                row_terms[i]
                + col_terms[j]
                - log_fact_n
                - gammaln(nij + 1)
                - gammaln(ai - nij + 1)
                - gammaln(bj - nij + 1)
                - gammaln(n - ai - bj + nij + 1)
            )
            mi_term = (nij / n) * (np.log(n * nij) - np.log(float(ai) * float(bj)))
            emi += float(np.sum(mi_term * np.exp(log_prob)))
    return emi


def ami(
    true: Partition | np.ndarray | Sequence[int],
    pred: Partition | np.ndarray | Sequence[int],
    ignore: np.ndarray | None = None,
) -> float:
    """
    Adjusted mutual information with max-normalization.

    AMI = (MI − E[MI]) / (max(H(U), H(V)) − E[MI]) over the elements not
    flagged in ``ignore``. Two single-cluster partitions score 1; otherwise a
    denominator below 1e-12 scores 0.

    Args:
        true: Ground-truth labels.
        pred: Predicted labels.
        ignore: Optional boolean mask of elements to drop.

    Returns:
        Score in [-1, 1].

    Raises:
        PartitionLengthError: Lengths of the partitions or mask differ.
        EvaluationError: No elements are left to score.
    """
    u, v = _as_labels(true), _as_labels(pred)
    if u.size != v.size:
        raise PartitionLengthError(f"partitions have {u.size} and {v.size} elements")
    if ignore is not None:
        ignore = np.asarray(ignore, dtype=bool)
        if ignore.size != u.size:
            raise PartitionLengthError(f"ignore mask has {ignore.size} elements, partitions {u.size}")
        keep = ~ignore.ravel()
        u, v = u[keep], v[keep]
    if u.size == 0:
        raise EvaluationError("no elements left to score")

    if np.unique(u).size == 1 and np.unique(v).size == 1:
        return 1.0

    contingency = contingency_matrix(u, v)
    mi = float(mutual_info_score(None, None, contingency=contingency))
    emi = expected_mutual_information(contingency)
    normalizer = max(entropy(contingency.sum(axis=1)), entropy(contingency.sum(axis=0)))
    denominator = normalizer - emi
    if denominator < DENOMINATOR_FLOOR:
        return 0.0
    return float((mi - emi) / denominator)


def _check_truth(truth: Collection[int], classes: int) -> frozenset[int]:
    present = frozenset(int(c) for c in truth)
    if not present:
        raise TruthSetError("truth set is empty")
    if len(present) > 2:
        raise TruthSetError(f"truth set {sorted(present)} has more than two classes")
    if any(c < 0 or c >= classes for c in present):
        raise TruthSetError(f"truth set {sorted(present)} is outside 0..{classes - 1}")
    return present


def top2_error(
    predictions: Tensor | np.ndarray,
    truth: Sequence[Collection[int]],
    scoring: TopKScoring = "set",
) -> float:
    """
    Classification error scored on the highest predicted classes.

    Each example is scored on its k most probable classes, k being the size
    of its truth set (top-1 for one digit, top-2 for two); ties go to the
    lowest class indices. "set" counts an example correct when its whole
    truth set is among them; "per_class" scores every true class separately.

    Args:
        predictions: [B, C] class distributions.
        truth: True classes per example (one or two each).
        scoring: "set" or "per_class".

    Returns:
        Fraction of examples (or true classes) scored wrong.

    Raises:
        TruthSetError: A truth set is empty, has more than two classes or
            names a class outside the prediction width.
    """
    probs = predictions.data if isinstance(predictions, Tensor) else np.asarray(predictions)
    if probs.ndim != 2 or probs.shape[0] != len(truth):
        raise PartitionLengthError(f"{len(truth)} truth sets for predictions of shape {probs.shape}")
    if probs.shape[0] == 0:
        raise EvaluationError("no examples to score")

    order = np.argsort(-probs, axis=1, kind="stable")
    misses = 0
    scored = 0
    for row, classes in enumerate(truth):
        present = _check_truth(classes, probs.shape[1])
        top = set(order[row, : len(present)].tolist())
        if scoring == "set":
            misses += 0 if present <= top else 1
            scored += 1
        else:
            misses += len(present - top)
            scored += len(present)
    return misses / scored
