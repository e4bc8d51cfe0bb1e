"""Cluster-to-class label alignment.

K-means emits arbitrary cluster indices; these routines remap them onto the
ground-truth label space. The binary path checks whether inverting the
labeling scores strictly better. The multi-class path builds a cluster-to-
class bijection from per-block frequency counts, relying on the test split
being laid out as k contiguous equal blocks in ascending class order (the
dataprep partition guarantees this). Both keep the original labeling on ties.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class AlignmentOutcome:
    """labels: final labeling; mapping[old_cluster] = new label, None when
    the original labeling was kept."""

    labels: np.ndarray
    accuracy: float
    mapping: np.ndarray | None
    corrected: bool


def _accuracy(y_true: np.ndarray, labels: np.ndarray) -> float:
    return float(np.mean(y_true == labels))


def _as_labels(name: str, values) -> np.ndarray:
    arr = np.asarray(values)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D")
    if arr.size and not np.issubdtype(arr.dtype, np.integer):
        rounded = np.asarray(values, dtype=np.float64)
        if not np.all(rounded == np.floor(rounded)):
            raise ValueError(f"{name} must hold integer labels")
    return arr.astype(np.int64)


def align_binary(y_true, y_pred) -> AlignmentOutcome:
    """Keep y_pred or its complement, whichever scores strictly higher."""
    y_true = _as_labels("y_true", y_true)
    y_pred = _as_labels("y_pred", y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if y_true.size == 0:
        raise ValueError("empty label vectors")
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() > 1:
            raise ValueError(f"{name} contains non-binary values")

    accuracy = _accuracy(y_true, y_pred)
    inverted = 1 - y_pred
    inverted_accuracy = _accuracy(y_true, inverted)
    if inverted_accuracy > accuracy:
        return AlignmentOutcome(
            labels=inverted,
            accuracy=inverted_accuracy,
            mapping=np.array([1, 0], dtype=np.int64),
            corrected=True,
        )
    return AlignmentOutcome(labels=y_pred, accuracy=accuracy, mapping=None, corrected=False)


def align_multiclass(y_true, y_pred, k: int, block_size: int) -> AlignmentOutcome:
    """Frequency-based cluster-to-class bijection over k equal test blocks.

    Step 1: each block claims its most frequent cluster if unclaimed.
    Step 2: unresolved blocks walk their own frequency distribution in
    descending count (ties by ascending cluster index) and claim the first
    unclaimed cluster present in the block.
    Step 3: still-unresolved blocks take the smallest unclaimed clusters.
    Step 4: the bijection is applied only if it strictly beats the original
    accuracy.
    """
    y_true = _as_labels("y_true", y_true)
    y_pred = _as_labels("y_pred", y_pred)
    if y_true.shape != y_pred.shape:
        raise ValueError(f"length mismatch: {y_true.size} vs {y_pred.size}")
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    if block_size < 1:
        raise ValueError(f"block_size must be positive, got {block_size}")
    if y_true.size != k * block_size:
        raise ValueError(
            f"length {y_true.size} does not divide into {k} blocks of {block_size}"
        )
    for name, arr in (("y_true", y_true), ("y_pred", y_pred)):
        if arr.min() < 0 or arr.max() >= k:
            raise ValueError(f"{name} contains labels outside 0..{k - 1}")

    counts = np.stack(
        [
            np.bincount(y_pred[i * block_size : (i + 1) * block_size], minlength=k)
            for i in range(k)
        ]
    )

    # assigned[i] = cluster claimed by class i
    assigned = np.full(k, -1, dtype=np.int64)
    claimed = np.zeros(k, dtype=bool)

    # step 1: dominant cluster per block (argmax takes the smallest index on ties)
    for i in range(k):
        dominant = int(np.argmax(counts[i]))
        if not claimed[dominant]:
            assigned[i] = dominant
            claimed[dominant] = True

    # step 2: walk the block's observed distribution, most frequent first
    for i in range(k):
        if assigned[i] >= 0:
            continue
        present = np.flatnonzero(counts[i] > 0)
        for cluster in sorted(present, key=lambda c: (-counts[i][c], c)):
            if not claimed[cluster]:
                assigned[i] = cluster
                claimed[cluster] = True
                break

    # step 3: smallest-index unclaimed clusters for whatever is left
    leftovers = iter(np.flatnonzero(~claimed))
    for i in range(k):
        if assigned[i] < 0:
            cluster = int(next(leftovers))
            assigned[i] = cluster
            claimed[cluster] = True

    # step 4: apply cluster assigned[i] -> class i only on strict improvement
    mapping = np.empty(k, dtype=np.int64)
    mapping[assigned] = np.arange(k)
    remapped = mapping[y_pred]
    accuracy = _accuracy(y_true, y_pred)
    corrected_accuracy = _accuracy(y_true, remapped)
    if corrected_accuracy > accuracy:
        return AlignmentOutcome(
            labels=remapped, accuracy=corrected_accuracy, mapping=mapping, corrected=True
        )
    return AlignmentOutcome(labels=y_pred, accuracy=accuracy, mapping=None, corrected=False)
