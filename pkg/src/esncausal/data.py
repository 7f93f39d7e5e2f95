"""Masked multivariate time series: loading, contamination and standardization.

A :class:`MaskedSeries` is an ``N x M`` value matrix plus an ``N x M``
observation mask. Unobserved cells hold ``NaN`` as a sentinel; nothing in the
package reads them as data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ArgumentError, DegenerateColumnError, FormatError

__all__ = [
    "MaskedSeries",
    "RemovedCell",
    "Standardization",
    "load_csv",
    "write_csv",
    "contaminate",
    "standardize",
    "read_removed",
    "write_removed",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class MaskedSeries:
    """N x M values with a boolean observation mask (True = observed)."""

    values: np.ndarray
    mask: np.ndarray
    names: tuple
    dt: Optional[float] = None

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        mask = np.asarray(self.mask, dtype=bool)
        if values.ndim != 2 or values.shape != mask.shape:
            raise ArgumentError(
                f"values {values.shape} and mask {mask.shape} must be equal 2-D shapes"
            )
        n, m = values.shape
        if n < 2 or m < 1:
            raise ArgumentError(f"need N >= 2 rows and M >= 1 columns, got {n}x{m}")
        names = tuple(str(s) for s in self.names)
        if len(names) != m:
            raise ArgumentError(f"{len(names)} names for {m} columns")
        if len(set(names)) != m:
            raise ArgumentError(f"variable names must be unique: {names}")
        values = np.where(mask, values, np.nan)
        object.__setattr__(self, "values", _frozen(values))
        object.__setattr__(self, "mask", _frozen(mask))
        object.__setattr__(self, "names", names)

    @classmethod
    def from_array(cls, values, names=None, dt=None) -> "MaskedSeries":
        """Wrap an array, treating non-finite entries as missing."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values[:, None]
        if names is None:
            names = [f"x{i + 1}" for i in range(values.shape[1])]
        return cls(values, np.isfinite(values), names, dt)

    @property
    def shape(self):
        return self.values.shape

    @property
    def n_rows(self) -> int:
        return self.values.shape[0]

    @property
    def n_vars(self) -> int:
        return self.values.shape[1]

    @property
    def fully_observed(self) -> bool:
        return bool(self.mask.all())

    def observed_count(self) -> int:
        return int(self.mask.sum())

    def column(self, j: int):
        """Return ``(time_index, values)`` of the observed cells of column ``j``."""
        rows = np.flatnonzero(self.mask[:, j])
        return rows.astype(float), self.values[rows, j]

    def replace(self, values=None, mask=None) -> "MaskedSeries":
        return MaskedSeries(
            self.values if values is None else values,
            self.mask if mask is None else mask,
            self.names,
            self.dt,
        )


class RemovedCell(NamedTuple):
    row: int
    col: int
    value: float


@dataclass(frozen=True)
class Standardization:
    """Per-column affine map ``(x - mean) / std``."""

    mean: np.ndarray
    std: np.ndarray = field()

    def __post_init__(self):
        std = np.asarray(self.std, dtype=float)
        if not np.all(std > 0):
            raise DegenerateColumnError("standard deviations must be positive")
        object.__setattr__(self, "mean", _frozen(np.asarray(self.mean, dtype=float)))
        object.__setattr__(self, "std", _frozen(std))

    def apply(self, series: MaskedSeries) -> MaskedSeries:
        return series.replace(values=(series.values - self.mean) / self.std)

    def invert(self, series: MaskedSeries) -> MaskedSeries:
        return series.replace(values=series.values * self.std + self.mean)


def _is_missing(field: str, token: Optional[str]) -> bool:
    s = field.strip()
    if s == "" or s.lower() == "nan":
        return True
    return token is not None and s == token


def load_csv(path, missing_token: Optional[str] = None, dt=None) -> MaskedSeries:
    """Read a header + numeric-rows CSV into a :class:`MaskedSeries`.

    Empty fields and ``nan`` (any case) are always missing; ``missing_token``
    adds one more spelling. Rows are numbered from 1 after the header and
    columns from 1 in error messages.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        names = [h.strip() for h in header]
        seen = set()
        for k, name in enumerate(names, 1):
            if name in seen:
                raise FormatError(f"{path}: duplicate header name {name!r}", column=k)
            seen.add(name)
        m = len(names)
        rows = []
        mask_rows = []
        for r, fields in enumerate(reader, 1):
            if not fields:
                continue
            if len(fields) != m:
                raise FormatError(
                    f"{path}: expected {m} fields, found {len(fields)}", row=r
                )
            vals = []
            obs = []
            for c, f in enumerate(fields, 1):
                if _is_missing(f, missing_token):
                    vals.append(math.nan)
                    obs.append(False)
                    continue
                try:
                    v = float(f)
                except ValueError:
                    raise FormatError(
                        f"{path}: cannot parse {f!r} as a number", row=r, column=c
                    ) from None
                if not math.isfinite(v):
                    raise FormatError(f"{path}: non-finite value {f!r}", row=r, column=c)
                vals.append(v)
                obs.append(True)
            rows.append(vals)
            mask_rows.append(obs)
    if len(rows) < 2:
        raise FormatError(f"{path}: need at least 2 data rows, found {len(rows)}")
    return MaskedSeries(np.array(rows), np.array(mask_rows), names, dt)


def write_csv(series: MaskedSeries, path) -> None:
    """Write values with 17 significant digits; masked cells become empty fields."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(series.names)
        for vals, obs in zip(series.values, series.mask):
            w.writerow(["%.17g" % v if o else "" for v, o in zip(vals, obs)])


def contaminate(series: MaskedSeries, fraction: float, seed: int):
    """Hide ``floor(fraction * observed)`` observed cells chosen uniformly at random.

    Returns the contaminated series and the removed cells (with their
    original values) sorted by ``(row, col)``.
    """
    if not 0.0 <= fraction < 1.0:
        raise ArgumentError(f"fraction must lie in [0, 1), got {fraction}")
    observed = np.flatnonzero(series.mask.ravel())
    # decimal reading of the fraction so that e.g. 0.29 * 100 gives 29, not 28
    k = math.floor(Fraction(repr(float(fraction))) * len(observed))
    if k == 0:
        return series, []
    rng = np.random.default_rng(seed)
    picked = np.sort(rng.choice(observed, size=k, replace=False))
    mask = series.mask.copy().ravel()
    mask[picked] = False
    rows, cols = np.unravel_index(picked, series.shape)
    removed = [
        RemovedCell(int(r), int(c), float(series.values[r, c])) for r, c in zip(rows, cols)
    ]
    return series.replace(mask=mask.reshape(series.shape)), removed


def standardize(series: MaskedSeries):
    """Center and scale each column over its observed cells (population std)."""
    bad = []
    means = np.empty(series.n_vars)
    stds = np.empty(series.n_vars)
    for j, name in enumerate(series.names):
        _, y = series.column(j)
        if len(y) < 2:
            bad.append(name)
            continue
        means[j] = y.mean()
        stds[j] = y.std()
        if not stds[j] > 0:
            bad.append(name)
    if bad:
        raise DegenerateColumnError(
            "degenerate column(s) (constant or fewer than 2 observed values): "
            + ", ".join(bad),
            columns=bad,
        )
    st = Standardization(means, stds)
    return st.apply(series), st


def write_removed(removed: Sequence[RemovedCell], path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["row", "col", "value"])
        for cell in removed:
            w.writerow([cell.row, cell.col, "%.17g" % cell.value])


def read_removed(path) -> list:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["row", "col", "value"]:
            raise FormatError(f"{path}: expected header row,col,value, got {header}")
        for r, fields in enumerate(reader, 1):
            if not fields:
                continue
            try:
                out.append(RemovedCell(int(fields[0]), int(fields[1]), float(fields[2])))
            except (ValueError, IndexError):
                raise FormatError(f"{path}: malformed removed-cell record", row=r) from None
    return out
