"""Data model, CSV ingestion, synthetic data, and split/resample plans.

CSV convention: comma-delimited UTF-8, optional single header row, the last
column is the response and all preceding columns are features. Written files
carry 17 significant digits so that float64 values round-trip exactly.

All randomness goes through ``numpy.random.default_rng`` (PCG64), so any
fixture is reproducible across platforms from its integer seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class CsvFormatError(ValueError):
    """Raised when a CSV file cannot be parsed into a valid dataset."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)  # never alias (or re-flag) caller-owned memory
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Dataset:
    """An (n x p) feature matrix with a length-n response vector.

    Both arrays are copied, cast to float64 and made read-only, so instances
    are safe to share across threads.
    """

    features: np.ndarray
    response: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.response, dtype=float)
        if X.ndim != 2:
            raise ValueError(f"features must be 2-D, got ndim={X.ndim}")
        if y.ndim != 1:
            raise ValueError(f"response must be 1-D, got ndim={y.ndim}")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError(f"need at least one row and one column, got shape {X.shape}")
        if X.shape[0] != y.shape[0]:
            raise ValueError(
                f"features have {X.shape[0]} rows but response has {y.shape[0]} entries"
            )
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset contains non-finite values")
        object.__setattr__(self, "features", _freeze(X))
        object.__setattr__(self, "response", _freeze(y))

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.features[idx], self.response[idx])


@dataclass(frozen=True)
class SplitPlan:
    """Disjoint train/test index lists over ``range(n)``."""

    train_indices: np.ndarray
    test_indices: np.ndarray
    seed: int = 0

    def __post_init__(self):
        tr = np.asarray(self.train_indices, dtype=np.int64)
        te = np.asarray(self.test_indices, dtype=np.int64)
        if len(np.intersect1d(tr, te)) > 0:
            raise ValueError("train and test indices overlap")
        if len(np.unique(tr)) != len(tr) or len(np.unique(te)) != len(te):
            raise ValueError("duplicate indices within a split")
        object.__setattr__(self, "train_indices", _freeze(tr))
        object.__setattr__(self, "test_indices", _freeze(te))


def load_csv(path, has_header: bool = False) -> Dataset:
    """Read a dataset from ``path``; the last column is the response.

    Parse failures name the offending data row (1-based, header excluded)
    and column. Ragged rows and non-finite values are rejected.
    """
    rows = []
    n_fields = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        for line_no, record in enumerate(reader):
            if not record:
                continue
            if has_header and line_no == 0:
                continue
            row_no = len(rows) + 1
            if n_fields is None:
                n_fields = len(record)
                if n_fields < 2:
                    raise CsvFormatError(
                        f"{path}: row {row_no} has {n_fields} field(s); "
                        "need at least one feature column plus the response"
                    )
            elif len(record) != n_fields:
                raise CsvFormatError(
                    f"{path}: row {row_no} has {len(record)} fields, expected {n_fields}"
                )
            values = []
            for col_no, token in enumerate(record, start=1):
                try:
                    v = float(token)
                except ValueError:
                    raise CsvFormatError(
                        f"{path}: row {row_no}, column {col_no}: "
                        f"cannot parse {token!r} as a number"
                    ) from None
                if not np.isfinite(v):
                    raise CsvFormatError(
                        f"{path}: row {row_no}, column {col_no}: non-finite value {token!r}"
                    )
                values.append(v)
            rows.append(values)
    if not rows:
        raise CsvFormatError(f"{path}: no data rows")
    arr = np.asarray(rows, dtype=float)
    return Dataset(arr[:, :-1], arr[:, -1])


def write_csv(dataset: Dataset, path, header: list[str] | None = None) -> None:
    """Write ``dataset`` to ``path`` at 17 significant digits per value."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        if header is not None:
            fh.write(",".join(header) + "\n")
        X, y = dataset.features, dataset.response
        for i in range(dataset.n):
            fields = [_fmt(v) for v in X[i]]
            fields.append(_fmt(y[i]))
            fh.write(",".join(fields) + "\n")


def generate_synthetic(n: int, noise_sd: float = 0.1, seed: int = 0) -> Dataset:
    """Draw x_i ~ U[-5, 5] and y_i = sin(2 pi x_i) + N(0, noise_sd^2).

    Deterministic for a fixed seed: x values are drawn first, then the noise,
    each from the same PCG64 stream.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if noise_sd < 0:
        raise ValueError(f"noise_sd must be >= 0, got {noise_sd}")
    rng = np.random.default_rng(seed)
    x = rng.uniform(-5.0, 5.0, size=n)
    eps = rng.normal(0.0, noise_sd, size=n) if noise_sd > 0 else np.zeros(n)
    y = np.sin(2.0 * np.pi * x) + eps
    return Dataset(x.reshape(n, 1), y)


def make_kfold(n: int, k: int, seed: int = 0) -> list[SplitPlan]:
    """Partition ``range(n)`` into k folds whose sizes differ by at most 1.

    Every index lands in exactly one test set; indices within each plan are
    sorted ascending so downstream slicing is order-stable.
    """
    if not 2 <= k <= n:
        raise ValueError(f"fold count must satisfy 2 <= k <= n, got k={k}, n={n}")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    base, extra = divmod(n, k)
    plans = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test = np.sort(perm[start : start + size])
        train = np.sort(np.concatenate([perm[:start], perm[start + size :]]))
        plans.append(SplitPlan(train_indices=train, test_indices=test, seed=seed))
        start += size
    return plans


def make_jackknife(n: int) -> list[SplitPlan]:
    """Leave-one-out plans: plan i tests on {i} and trains on the rest."""
    if n < 2:
        raise ValueError(f"jackknife needs n >= 2, got {n}")
    all_idx = np.arange(n)
    return [
        SplitPlan(train_indices=np.delete(all_idx, i), test_indices=all_idx[i : i + 1])
        for i in range(n)
    ]
