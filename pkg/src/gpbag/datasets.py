"""Dataset loading, splitting, standardization, and bootstrap plans.

The canonical on-disk format is a CSV file whose rows are decimal numbers,
with the label in the last column and at most one header row.  Everything
downstream works on float64 arrays; classification labels are restricted to
{0, 1}.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

TASKS = ("regression", "classification")


def _check_task(task: str) -> None:
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}; expected one of {TASKS}")


@dataclass(frozen=True, eq=False)
class Dataset:
    """An immutable matrix of features plus a label vector.

    Attributes
    ----------
    name : str
        Identifier used in logs and result files.
    features : np.ndarray
        Shape (n_rows, n_features), float64, read-only.
    labels : np.ndarray
        Shape (n_rows,), float64, read-only.  For classification the
        values must be exactly 0.0 or 1.0.
    task : str
        Either "regression" or "classification".
    """

    name: str
    features: np.ndarray
    labels: np.ndarray
    task: str

    def __post_init__(self) -> None:
        _check_task(self.task)
        feats = np.asarray(self.features, dtype=np.float64)
        labs = np.asarray(self.labels, dtype=np.float64)
        if feats.ndim != 2:
            raise ValueError("features must be a 2-d array")
        if labs.ndim != 1:
            raise ValueError("labels must be a 1-d array")
        if feats.shape[0] != labs.shape[0]:
            raise ValueError(
                f"row mismatch: {feats.shape[0]} feature rows, {labs.shape[0]} labels"
            )
        if feats.shape[0] == 0:
            raise ValueError("dataset has no rows")
        if feats.shape[1] == 0:
            raise ValueError("dataset has no feature columns")
        if not np.all(np.isfinite(feats)):
            raise ValueError("features contain non-finite values")
        if not np.all(np.isfinite(labs)):
            raise ValueError("labels contain non-finite values")
        if self.task == "classification" and not np.all((labs == 0.0) | (labs == 1.0)):
            raise ValueError("classification labels must be in {0, 1}")
        feats = feats.copy()
        labs = labs.copy()
        feats.flags.writeable = False
        labs.flags.writeable = False
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labs)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


@dataclass(frozen=True, eq=False)
class StandardizationStats:
    """Per-feature mean and population standard deviation of a training set."""

    means: np.ndarray
    stdevs: np.ndarray
    constant: np.ndarray  # boolean mask of zero-variance columns

    def transform(self, features: np.ndarray) -> np.ndarray:
        """Apply the stored z-score transform; constant columns map to 0."""
        feats = np.asarray(features, dtype=np.float64)
        safe = np.where(self.constant, 1.0, self.stdevs)
        out = (feats - self.means) / safe
        out[:, self.constant] = 0.0
        return out


@dataclass(frozen=True, eq=False)
class BootstrapPlan:
    """Row indices of every bootstrap sample, drawn once per run.

    ``indices`` has shape (beta, n_rows); entry [j, i] is a training-row
    index, drawn uniformly with replacement.
    """

    indices: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices)
        if idx.ndim != 2:
            raise ValueError("bootstrap indices must be a 2-d array")
        idx = idx.astype(np.int64, copy=True)
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def beta(self) -> int:
        return self.indices.shape[0]

    @property
    def n_rows(self) -> int:
        return self.indices.shape[1]


def load_csv(path: str | Path, task: str, name: str | None = None) -> Dataset:
    """Load a canonical CSV file: numeric rows, label last, optional header.

    A first row whose first cell does not parse as a number is treated as a
    header and skipped.  Ragged rows, non-numeric cells elsewhere, and
    non-finite values raise ValueError.
    """
    _check_task(task)
    path = Path(path)
    lines = [ln for ln in path.read_text().splitlines() if ln.strip() != ""]
    if not lines:
        raise ValueError(f"{path}: file contains no data rows")
    rows = [ln.split(",") for ln in lines]
    start = 0
    try:
        float(rows[0][0])
    except ValueError:
        start = 1
    if start == len(rows):
        raise ValueError(f"{path}: header row but no data rows")
    width = len(rows[start])
    if width < 2:
        raise ValueError(f"{path}: need at least one feature column plus a label")
    parsed = np.empty((len(rows) - start, width), dtype=np.float64)
    for r, row in enumerate(rows[start:], start=start):
        if len(row) != width:
            raise ValueError(
                f"{path}: row {r + 1} has {len(row)} cells, expected {width}"
            )
        for c, cell in enumerate(row):
            try:
                parsed[r - start, c] = float(cell)
            except ValueError:
                raise ValueError(
                    f"{path}: non-numeric cell {cell!r} at row {r + 1}, column {c + 1}"
                ) from None
    if not np.all(np.isfinite(parsed)):
        raise ValueError(f"{path}: non-finite value in data")
    return Dataset(
        name=name if name is not None else path.stem,
        features=parsed[:, :-1],
        labels=parsed[:, -1],
        task=task,
    )


def split(
    dataset: Dataset, test_fraction: float, rng: np.random.Generator
) -> tuple[Dataset, Dataset]:
    """Randomly partition rows into a training and a test set.

    The training set receives ceil(n * (1 - test_fraction)) rows.  Raises
    ValueError when either side would be empty.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = dataset.n_rows
    n_train = int(np.ceil(n * (1.0 - test_fraction)))
    if n_train <= 0 or n_train >= n:
        raise ValueError(
            f"degenerate split: {n_train} training rows out of {n} total"
        )
    perm = rng.permutation(n)
    train_idx, test_idx = perm[:n_train], perm[n_train:]
    train = Dataset(
        name=dataset.name,
        features=dataset.features[train_idx],
        labels=dataset.labels[train_idx],
        task=dataset.task,
    )
    test = Dataset(
        name=dataset.name,
        features=dataset.features[test_idx],
        labels=dataset.labels[test_idx],
        task=dataset.task,
    )
    return train, test


def standardize(
    train: Dataset, test: Dataset
) -> tuple[Dataset, Dataset, StandardizationStats]:
    """Z-score features using training-set statistics; labels stay raw.

    Standard deviations use the population convention (ddof=0).  Columns
    that are constant on the training set become all-zero in both sets.
    """
    means = train.features.mean(axis=0)
    stdevs = train.features.std(axis=0, ddof=0)
    constant = stdevs == 0.0
    stats = StandardizationStats(means=means, stdevs=stdevs, constant=constant)
    train_std = Dataset(
        name=train.name,
        features=stats.transform(train.features),
        labels=train.labels,
        task=train.task,
    )
    test_std = Dataset(
        name=test.name,
        features=stats.transform(test.features),
        labels=test.labels,
        task=test.task,
    )
    return train_std, test_std, stats


def sample_bootstrap(
    n_rows: int, beta: int, rng: np.random.Generator
) -> BootstrapPlan:
    """Draw beta bootstrap samples of size n_rows, uniformly with replacement."""
    if n_rows <= 0:
        raise ValueError("n_rows must be positive")
    if beta <= 0:
        raise ValueError("beta must be positive")
    indices = rng.integers(0, n_rows, size=(beta, n_rows), dtype=np.int64)
    return BootstrapPlan(indices=indices)
