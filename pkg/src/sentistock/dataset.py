"""Min-max scaling, chronological splitting and lookback windowing."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DegenerateDatasetError, InsufficientRowsError, UnknownColumnError
from .mapping import MasterDataset

FIT_SCOPES = ("train_only", "full")


@dataclass
class ColumnScaler:
    """Observed min/max bounds for one column."""

    column: str
    vmin: float
    vmax: float

    @property
    def degenerate(self) -> bool:
        return self.vmax == self.vmin

    def transform(self, values: np.ndarray) -> np.ndarray:
        """(x - min) / (max - min); degenerate columns map to 0. Not clipped."""
        values = np.asarray(values, dtype=float)
        if self.degenerate:
            return np.zeros_like(values)
        return (values - self.vmin) / (self.vmax - self.vmin)

    def inverse(self, values: np.ndarray) -> np.ndarray:
        """min + y * (max - min); degenerate columns return min everywhere."""
        values = np.asarray(values, dtype=float)
        if self.degenerate:
            return np.full_like(values, self.vmin)
        return self.vmin + values * (self.vmax - self.vmin)


@dataclass
class ScalerSet:
    """One ColumnScaler per master-dataset column."""

    scalers: dict[str, ColumnScaler]
    fit_scope: str = "train_only"

    def __getitem__(self, column: str) -> ColumnScaler:
        try:
            return self.scalers[column]
        except KeyError:
            raise UnknownColumnError(column) from None


@dataclass
class WindowedSet:
    """Supervised pairs: X[k] holds w consecutive rows, y[k] the next row's target."""

    X: np.ndarray  # (n_samples, lookback, n_features)
    y: np.ndarray  # (n_samples,)
    lookback: int

    def __len__(self) -> int:
        return len(self.y)


def fit_scalers(data: MasterDataset, split_ratio: float = 0.8, fit_scope: str = "train_only") -> ScalerSet:
    """Fit per-column min/max bounds.

    With fit_scope="train_only" (the default) bounds come from the first
    floor(ratio * N) rows, avoiding test-set leakage; "full" uses every row.
    """
    if fit_scope not in FIT_SCOPES:
        raise ValueError(f"unknown fit_scope {fit_scope!r}")
    if not 0 < split_ratio < 1:
        raise ValueError("split_ratio must be in (0, 1)")
    n = data.n_rows
    n_fit = math.floor(split_ratio * n) if fit_scope == "train_only" else n
    if n_fit < 1:
        raise DegenerateDatasetError(f"no rows to fit scalers on (n={n}, ratio={split_ratio})")
    scalers = {}
    for name, values in data.columns.items():
        window = values[:n_fit]
        scalers[name] = ColumnScaler(column=name, vmin=float(window.min()), vmax=float(window.max()))
    return ScalerSet(scalers=scalers, fit_scope=fit_scope)


def transform(scalers: ScalerSet, data: MasterDataset) -> MasterDataset:
    """Scale every column of a master dataset. Out-of-range values pass through unclipped."""
    columns = {name: scalers[name].transform(values) for name, values in data.columns.items()}
    return MasterDataset(
        calendar=list(data.calendar), columns=columns, target_column=data.target_column
    )


def inverse_transform(scalers: ScalerSet, column: str, values: np.ndarray) -> np.ndarray:
    """Map scaled values of one column back to data units."""
    return scalers[column].inverse(values)


def chronological_split(data: MasterDataset, split_ratio: float = 0.8) -> tuple[MasterDataset, MasterDataset]:
    """Split into (train, test) by row position: first floor(ratio * N) rows train.

    No shuffling; order is preserved. Raises DegenerateDatasetError for
    datasets with fewer than 2 rows.
    """
    if not 0 < split_ratio < 1:
        raise ValueError("split_ratio must be in (0, 1)")
    n = data.n_rows
    if n < 2:
        raise DegenerateDatasetError(f"cannot split {n} rows")
    n_train = math.floor(split_ratio * n)
    train = MasterDataset(
        calendar=data.calendar[:n_train],
        columns={k: v[:n_train] for k, v in data.columns.items()},
        target_column=data.target_column,
    )
    test = MasterDataset(
        calendar=data.calendar[n_train:],
        columns={k: v[n_train:] for k, v in data.columns.items()},
        target_column=data.target_column,
    )
    return train, test


def make_windows(data: MasterDataset, lookback: int, target: str | None = None) -> WindowedSet:
    """Slice rows into supervised pairs.

    Sample k covers feature rows [k, k+w) with target row k+w, giving N - w
    samples. The target column defaults to the dataset's own. Raises
    InsufficientRowsError when N <= w.
    """
    if lookback < 1:
        raise ValueError("lookback must be >= 1")
    target = data.target_column if target is None else target
    if target not in data.columns:
        raise UnknownColumnError(target)
    n = data.n_rows
    if n <= lookback:
        raise InsufficientRowsError(f"{n} rows cannot form a window of {lookback}")
    features = data.feature_matrix()
    n_samples = n - lookback
    X = np.stack([features[k : k + lookback] for k in range(n_samples)])
    y = data.columns[target][lookback:].astype(float).copy()
    return WindowedSet(X=X, y=y, lookback=lookback)


def save_scalers(scalers: ScalerSet, path: str | Path) -> None:
    """Persist a scaler set as CSV (column,min,max,fit_scope)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("column", "min", "max", "fit_scope"))
        for name, scaler in scalers.scalers.items():
            writer.writerow((name, repr(scaler.vmin), repr(scaler.vmax), scalers.fit_scope))


def load_scalers(path: str | Path) -> ScalerSet:
    """Read a scaler set written by save_scalers."""
    scalers = {}
    fit_scope = "train_only"
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            scalers[row["column"]] = ColumnScaler(
                column=row["column"], vmin=float(row["min"]), vmax=float(row["max"])
            )
            fit_scope = row["fit_scope"]
    return ScalerSet(scalers=scalers, fit_scope=fit_scope)
