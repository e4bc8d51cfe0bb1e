"""Dataset ingestion and splitting.

CSV loading with dense label re-encoding, min-max normalization fit on the
training split only, class-balanced test extraction ordered as contiguous
class blocks, and synthetic Gaussian-cluster datasets for small experiments.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

Matrix = np.ndarray


class DatasetError(ValueError):
    """Base class for dataset ingestion and splitting failures."""


class LabelColumnError(DatasetError):
    """The requested label column cannot be resolved against the header."""


class EmptyDataError(DatasetError):
    """The file has no header or no usable data rows."""


class InsufficientClassError(DatasetError):
    """A class has fewer samples than the test split demands."""


@dataclass
class LabeledDataset:
    """Feature matrix with dense integer labels in 0..k-1."""

    features: Matrix
    labels: np.ndarray
    feature_names: list[str]
    k: int

    def __post_init__(self) -> None:
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2:
            raise DatasetError(f"features must be 2-D, got {self.features.ndim} dimensions")
        if self.labels.shape != (self.features.shape[0],):
            raise DatasetError(
                f"labels length {self.labels.shape} does not match {self.features.shape[0]} rows"
            )
        if len(self.feature_names) != self.features.shape[1]:
            raise DatasetError(
                f"{len(self.feature_names)} feature names for {self.features.shape[1]} columns"
            )
        if self.labels.size and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise DatasetError(f"labels must lie in 0..{self.k - 1}")

    @property
    def row_count(self) -> int:
        return self.features.shape[0]

    @property
    def feature_count(self) -> int:
        return self.features.shape[1]


@dataclass
class LoadReport:
    """Ingestion diagnostic: how many raw rows were read and dropped."""

    rows_read: int
    rows_dropped: int


@dataclass
class MinMaxScaler:
    minimum: np.ndarray
    maximum: np.ndarray

    def __post_init__(self) -> None:
        self.minimum = np.asarray(self.minimum, dtype=np.float64)
        self.maximum = np.asarray(self.maximum, dtype=np.float64)
        if self.minimum.shape != self.maximum.shape or self.minimum.ndim != 1:
            raise DatasetError("scaler min/max must be 1-D vectors of equal length")
        if np.any(self.minimum > self.maximum):
            raise DatasetError("scaler min exceeds max")


@dataclass(frozen=True)
class SplitSpec:
    test_per_class: int
    train_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.test_per_class < 1:
            raise DatasetError(f"test_per_class must be positive, got {self.test_per_class}")
        if not 0.0 < self.train_fraction < 1.0:
            raise DatasetError(f"train_fraction must lie in (0,1), got {self.train_fraction}")


@dataclass(frozen=True)
class SynthSpec:
    k: int
    feature_count: int
    per_class_count: int
    class_mean_separation: float
    noise_std: float
    seed: int

    def __post_init__(self) -> None:
        if self.k < 2:
            raise DatasetError(f"k must be >= 2, got {self.k}")
        if self.feature_count < 1:
            raise DatasetError(f"feature_count must be >= 1, got {self.feature_count}")
        if self.per_class_count < 1:
            raise DatasetError(f"per_class_count must be >= 1, got {self.per_class_count}")
        if self.class_mean_separation <= 0:
            raise DatasetError(
                f"class_mean_separation must be positive, got {self.class_mean_separation}"
            )
        if self.noise_std <= 0:
            raise DatasetError(f"noise_std must be positive, got {self.noise_std}")


@dataclass
class DatasetSplits:
    train: LabeledDataset
    validation: LabeledDataset
    test: LabeledDataset


def load_csv(path, label_column: str | int = "label") -> tuple[LabeledDataset, LoadReport]:
    """Parse a headered CSV into features + dense labels.

    The label column is matched by header name first, then by zero-based
    index if the argument is an integer (or an integer-like string that is
    not a header name). Distinct raw label values are re-encoded to
    0..k-1 in first-appearance order. Rows with a missing or unparseable
    feature cell, or a non-finite feature value, are dropped and counted.
    """
    with open(path, "r", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise EmptyDataError(f"{path}: file has no header row") from None
        label_idx = _resolve_label_column(header, label_column, path)
        feature_names = [name for i, name in enumerate(header) if i != label_idx]

        rows: list[list[float]] = []
        raw_labels: list[str] = []
        read = 0
        dropped = 0
        for cells in reader:
            read += 1
            if len(cells) != len(header):
                dropped += 1
                continue
            try:
                feats = [float(cells[i]) for i in range(len(cells)) if i != label_idx]
            except ValueError:
                dropped += 1
                continue
            if not all(np.isfinite(feats)):
                dropped += 1
                continue
            rows.append(feats)
            raw_labels.append(cells[label_idx])

    if not rows:
        raise EmptyDataError(f"{path}: no usable data rows ({dropped} dropped)")

    # dense re-encoding by first appearance of each distinct raw label
    mapping: dict[str, int] = {}
    labels = np.empty(len(raw_labels), dtype=np.int64)
    for i, raw in enumerate(raw_labels):
        if raw not in mapping:
            mapping[raw] = len(mapping)
        labels[i] = mapping[raw]

    ds = LabeledDataset(
        features=np.asarray(rows, dtype=np.float64),
        labels=labels,
        feature_names=feature_names,
        k=len(mapping),
    )
    return ds, LoadReport(rows_read=read, rows_dropped=dropped)


def _resolve_label_column(header: list[str], label_column: str | int, path) -> int:
    if isinstance(label_column, str) and label_column in header:
        return header.index(label_column)
    try:
        idx = int(label_column)
    except (TypeError, ValueError):
        raise LabelColumnError(f"{path}: no column named {label_column!r} in header") from None
    if not 0 <= idx < len(header):
        raise LabelColumnError(
            f"{path}: label column index {idx} out of range for {len(header)} columns"
        )
    return idx


def fit_scaler(train_features: Matrix) -> MinMaxScaler:
    """Per-feature min/max from the given matrix (fit on training data only)."""
    train_features = np.asarray(train_features, dtype=np.float64)
    if train_features.ndim != 2 or train_features.shape[0] == 0:
        raise DatasetError("scaler must be fit on a non-empty 2-D matrix")
    return MinMaxScaler(train_features.min(axis=0), train_features.max(axis=0))


def apply_scaler(scaler: MinMaxScaler, features: Matrix) -> Matrix:
    """x' = (x - min) / (max - min) per feature.

    Constant features (max = min) divide by 1 and so map to 0 on the fitting
    data. Values outside the fitted range are not clamped.
    """
    features = np.asarray(features, dtype=np.float64)
    if features.ndim != 2 or features.shape[1] != scaler.minimum.shape[0]:
        raise DatasetError(
            f"feature count mismatch: scaler has {scaler.minimum.shape[0]}, "
            f"data has {features.shape[1] if features.ndim == 2 else 'non-2-D'}"
        )
    span = scaler.maximum - scaler.minimum
    span = np.where(span == 0.0, 1.0, span)
    return (features - scaler.minimum) / span


def partition(ds: LabeledDataset, split: SplitSpec) -> DatasetSplits:
    """Class-balanced test extraction plus seeded train/validation split.

    The test split holds exactly test_per_class rows per class, laid out as
    contiguous blocks in ascending class order (the block structure the
    multi-class label alignment relies on). The remaining rows are shuffled
    and split train_fraction / (1 - train_fraction). The three parts are
    disjoint and cover every row.
    """
    rng = np.random.default_rng(split.seed)
    test_indices: list[np.ndarray] = []
    test_mask = np.zeros(ds.row_count, dtype=bool)
    for c in range(ds.k):
        members = np.flatnonzero(ds.labels == c)
        if members.size < split.test_per_class:
            raise InsufficientClassError(
                f"class {c} has {members.size} samples, test split needs {split.test_per_class}"
            )
        chosen = rng.choice(members, size=split.test_per_class, replace=False)
        test_indices.append(chosen)
        test_mask[chosen] = True

    test_idx = np.concatenate(test_indices)
    rest = np.flatnonzero(~test_mask)
    order = rng.permutation(rest.size)
    rest = rest[order]
    n_train = int(split.train_fraction * rest.size)
    train_idx = rest[:n_train]
    val_idx = rest[n_train:]

    def take(idx: np.ndarray) -> LabeledDataset:
        return LabeledDataset(
            features=ds.features[idx],
            labels=ds.labels[idx],
            feature_names=list(ds.feature_names),
            k=ds.k,
        )

    return DatasetSplits(train=take(train_idx), validation=take(val_idx), test=take(test_idx))


def synth_generate(spec: SynthSpec) -> LabeledDataset:
    """Isotropic Gaussian cluster per class; class c is centered at
    c * class_mean_separation on every coordinate."""
    rng = np.random.default_rng(spec.seed)
    blocks = []
    labels = []
    for c in range(spec.k):
        mean = float(c) * spec.class_mean_separation
        blocks.append(
            rng.normal(mean, spec.noise_std, size=(spec.per_class_count, spec.feature_count))
        )
        labels.append(np.full(spec.per_class_count, c, dtype=np.int64))
    return LabeledDataset(
        features=np.vstack(blocks),
        labels=np.concatenate(labels),
        feature_names=[f"f{i}" for i in range(spec.feature_count)],
        k=spec.k,
    )


def write_csv(ds: LabeledDataset, path) -> None:
    """Write a dataset in the same headered format load_csv reads."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ds.feature_names + ["label"])
        for row, label in zip(ds.features, ds.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])
