"""Datasets, CSV input/output, chronological splits and synthetic series."""

from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Invalid or unreadable input data."""


@dataclass(frozen=True)
class Standardization:
    """Affine maps taking inputs and targets to zero mean, unit variance."""

    x_shift: tuple
    x_scale: tuple
    y_mean: float
    y_scale: float

    @classmethod
    def fit(cls, X, y) -> "Standardization":
        x_scale = X.std(axis=0)
        x_scale[x_scale == 0] = 1.0
        y_scale = float(y.std()) or 1.0
        return cls(tuple(X.mean(axis=0)), tuple(x_scale), float(y.mean()), y_scale)

    def x(self, X):
        return (np.asarray(X, dtype=float) - np.array(self.x_shift)) / np.array(self.x_scale)

    def x_inverse(self, Xs):
        return np.asarray(Xs) * np.array(self.x_scale) + np.array(self.x_shift)

    def y(self, y):
        return (np.asarray(y, dtype=float) - self.y_mean) / self.y_scale

    def y_inverse(self, ys):
        return np.asarray(ys) * self.y_scale + self.y_mean

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d) -> "Standardization":
        return cls(
            tuple(float(v) for v in d["x_shift"]),
            tuple(float(v) for v in d["x_scale"]),
            float(d["y_mean"]),
            float(d["y_scale"]),
        )


class Dataset:
    """Training inputs ``X`` (n, d) and observations ``y`` (n,), in original units.

    The standardization is computed from the data unless one is supplied.
    """

    def __init__(self, X, y, standardization: Standardization | None = None):
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X[:, None]
        y = np.asarray(y, dtype=float).ravel()
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise DataError(f"X has shape {X.shape} but y has {y.shape[0]} entries")
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError("dataset must contain at least one point and one input column")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DataError("dataset contains non-finite values")
        self.X = X
        self.y = y
        self.standardization = standardization or Standardization.fit(X, y)

    def __len__(self):
        return self.X.shape[0]

    def __repr__(self):
        return f"Dataset(n={len(self)}, d={self.dim})"

    @property
    def dim(self) -> int:
        return self.X.shape[1]

    @property
    def Xs(self) -> np.ndarray:
        return self.standardization.x(self.X)

    @property
    def ys(self) -> np.ndarray:
        return self.standardization.y(self.y)

    def rows(self, index) -> "Dataset":
        """Subset of rows with a freshly computed standardization."""
        return Dataset(self.X[index], self.y[index])


@dataclass(frozen=True)
class SeriesSpec:
    """Where a series comes from: a CSV file or a named synthetic generator."""

    kind: str
    path: str | None = None
    x_col: int | str = 0
    y_col: int | str = 1
    header: bool | None = None
    dates: bool = False
    n: int | None = None
    seed: int = 0
    noise_sd: float | None = None

    def load(self) -> Dataset:
        if self.kind == "csv":
            return load_csv(self.path, self.x_col, self.y_col, self.header, self.dates)
        gen = GENERATORS.get(self.kind)
        if gen is None:
            raise DataError(f"unknown series kind {self.kind!r}")
        kwargs = {"seed": self.seed}
        if self.n is not None:
            kwargs["n"] = self.n
        if self.noise_sd is not None:
            kwargs["noise_sd"] = self.noise_sd
        return gen(**kwargs)

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def year_month_to_float(text: str) -> float:
    """``"1949-03"`` -> ``1949 + 2/12``."""
    parts = text.strip().split("-")
    if len(parts) != 2:
        raise ValueError(f"expected YYYY-MM, got {text!r}")
    year, month = int(parts[0]), int(parts[1])
    if not 1 <= month <= 12:
        raise ValueError(f"month out of range in {text!r}")
    return year + (month - 1) / 12.0


def _is_data_field(text, dates):
    try:
        float(text)
    except ValueError:
        if not dates:
            return False
        try:
            year_month_to_float(text)
        except ValueError:
            return False
    return True


def _read_table(path, header, dates):
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            lines = list(csv.reader(fh))
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror or exc}") from None
    numbered = [(i + 1, row) for i, row in enumerate(lines) if any(f.strip() for f in row)]
    if not numbered:
        raise DataError(f"{path}: file is empty")
    names = None
    if header is None:
        header = not all(_is_data_field(f, dates) for f in numbered[0][1])
    if header:
        names = [f.strip() for f in numbered[0][1]]
        numbered = numbered[1:]
    return names, numbered


def _column_index(path, names, col):
    if isinstance(col, str) and not col.isdigit():
        if names is None or col not in names:
            raise DataError(f"{path}: no column named {col!r}")
        return names.index(col)
    return int(col)


def _read_columns(path, cols, header, dates, min_rows):
    names, numbered = _read_table(path, header, dates)
    idx = [_column_index(path, names, c) for c in cols]
    out = [[] for _ in cols]
    for lineno, row in numbered:
        try:
            fields = [row[i].strip() for i in idx]
            values = [
                year_month_to_float(f) if dates and k == 0 else float(f)
                for k, f in enumerate(fields)
            ]
        except (IndexError, ValueError):
            raise DataError(f"{path}: malformed row at line {lineno}: {','.join(row)!r}") from None
        if not all(math.isfinite(v) for v in values):
            raise DataError(f"{path}: non-finite value at line {lineno}")
        for acc, v in zip(out, values):
            acc.append(v)
    if len(out[0]) < min_rows:
        raise DataError(f"{path}: need at least {min_rows} data rows, found {len(out[0])}")
    return [np.array(v) for v in out]


def load_csv(path, x_col=0, y_col=1, header=None, dates=False, min_rows=2) -> Dataset:
    """Read one input column and one target column from a CSV file.

    Parameters
    ----------
    path : str or Path
    x_col, y_col : int or str
        Column index, or column name when the file has a header.
    header : bool, optional
        Whether the first line is a header. When None, a first line with any
        non-numeric field is taken as a header.
    dates : bool
        Parse the x column as ``YYYY-MM`` into fractional years.
    min_rows : int
        Fewer data rows than this is an error.

    Rows keep their file order; duplicate x values are allowed.
    """
    x, y = _read_columns(path, [x_col, y_col], header, dates, min_rows)
    return Dataset(x, y)


def load_inputs(path, x_col=0, header=None, dates=False) -> np.ndarray:
    """Read a single column of query inputs."""
    return _read_columns(path, [x_col], header, dates, 1)[0]


def save_csv(path, dataset: Dataset):
    """Write a 1-D dataset with header ``x,y``."""
    if dataset.dim != 1:
        raise DataError("save_csv writes 1-D datasets only")
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in zip(dataset.X[:, 0], dataset.y):
            w.writerow([repr(float(x)), repr(float(y))])


def split_tail(dataset: Dataset, holdout: float = 0.2) -> tuple[Dataset, Dataset]:
    """Chronological split: the first ``ceil(n (1 - holdout))`` rows train, the rest test."""
    if not 0.0 < holdout < 1.0:
        raise DataError(f"holdout fraction must lie in (0, 1), got {holdout}")
    n = len(dataset)
    # ceil(n (1 - f)) == n - floor(n f); the epsilon absorbs products like 120 * 0.2
    n_test = int(math.floor(n * holdout + 1e-9))
    n_train = n - n_test
    if n_train < 2 or n_test < 1:
        raise DataError(f"holdout {holdout} on {n} rows leaves {n_train} train / {n_test} test")
    return dataset.rows(slice(0, n_train)), dataset.rows(slice(n_train, n))


def _noise(n, seed, noise_sd):
    if noise_sd < 0:
        raise DataError("noise_sd must be nonnegative")
    if noise_sd == 0:
        return np.zeros(n)
    return np.random.default_rng(seed).normal(0.0, noise_sd, n)


def _check_n(n):
    if int(n) != n or n < 2:
        raise DataError(f"n must be an integer >= 2, got {n!r}")
    return int(n)


def sinc(x):
    """``sin(x) / x`` with the removable singularity filled in."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x == 0, 1.0, x)
    return np.where(x == 0, 1.0, np.sin(safe) / safe)


def gen_sinc(n=30, seed=0, noise_sd=0.0, lo=-10.0, hi=10.0) -> Dataset:
    """``sin(x)/x`` on a uniform grid of ``n`` points over ``[lo, hi]``."""
    n = _check_n(n)
    x = np.linspace(lo, hi, n)
    return Dataset(x, sinc(x) + _noise(n, seed, noise_sd))


# seasonal-trend constants: y = a t + b t^2 + c sin(2 pi t / 12)
SEASONAL_SLOPE = 0.1
SEASONAL_CURVATURE = 5e-4
SEASONAL_AMPLITUDE = 1.5
SEASONAL_NOISE_SD = 0.2


def gen_seasonal_trend(
    n=120,
    seed=0,
    noise_sd=SEASONAL_NOISE_SD,
    slope=SEASONAL_SLOPE,
    curvature=SEASONAL_CURVATURE,
    amplitude=SEASONAL_AMPLITUDE,
) -> Dataset:
    """Monthly series with a quadratic trend and a 12-month cycle (CO2-like)."""
    n = _check_n(n)
    t = np.arange(n, dtype=float)
    y = slope * t + curvature * t**2 + amplitude * np.sin(2 * np.pi * t / 12.0)
    return Dataset(t, y + _noise(n, seed, noise_sd))


# airline-like constants: y = L exp(g t) (1 + s1 sin(2 pi t/12) + s2 sin(4 pi t/12))
AIRLINE_LEVEL = 100.0
AIRLINE_GROWTH = 0.01
AIRLINE_SEASONAL = (0.15, 0.05)
AIRLINE_NOISE_SD = 3.0


def gen_airline_like(
    n=144,
    seed=0,
    noise_sd=AIRLINE_NOISE_SD,
    level=AIRLINE_LEVEL,
    growth=AIRLINE_GROWTH,
    seasonal=AIRLINE_SEASONAL,
) -> Dataset:
    """Monthly series whose seasonal swing grows with an exponential trend."""
    n = _check_n(n)
    t = np.arange(n, dtype=float)
    phase = 2 * np.pi * t / 12.0
    season = 1.0 + seasonal[0] * np.sin(phase) + seasonal[1] * np.sin(2 * phase)
    y = level * np.exp(growth * t) * season
    return Dataset(t, y + _noise(n, seed, noise_sd))


GENERATORS = {
    "sinc": gen_sinc,
    "seasonal-trend": gen_seasonal_trend,
    "airline-like": gen_airline_like,
}


def detrend(y, degree=2) -> np.ndarray:
    """Residual of a least-squares polynomial fit against the sample index."""
    y = np.asarray(y, dtype=float)
    t = np.arange(y.size, dtype=float)
    coef = np.polynomial.polynomial.polyfit(t, y, degree)
    return y - np.polynomial.polynomial.polyval(t, coef)


def lag_correlation(y, lag) -> float:
    """Pearson correlation between ``y[:-lag]`` and ``y[lag:]``."""
    y = np.asarray(y, dtype=float)
    if not 0 < lag < y.size - 1:
        raise ValueError(f"lag {lag} needs at least {lag + 2} samples")
    return float(np.corrcoef(y[:-lag], y[lag:])[0, 1])
