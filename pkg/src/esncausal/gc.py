"""Granger-causal strength matrices from echo state network residuals.

``strengths[j, i]`` is the log ratio between the one-step prediction error
variance of target ``i`` when input ``j`` is withheld and the error variance
of the full model. Every restricted model reuses the full model's reservoir
with one input column of ``W_in`` deleted.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import MaskedSeries
from .errors import ArgumentError, DataError, DegenerateColumnError, FormatError
from .esn import EsnConfig, StateTrajectory, build_reservoir, fit_readout, residuals, run_states

log = logging.getLogger(__name__)

VARIANCE_FLOOR = 1e-12


@dataclass(frozen=True)
class CausalMatrix:
    strengths: np.ndarray
    names: tuple
    normalized: bool = False
    floor_clamped: bool = False

    def __post_init__(self):
        s = np.array(self.strengths, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ArgumentError(f"strengths must be square, got {s.shape}")
        if len(self.names) != s.shape[0]:
            raise ArgumentError(f"{len(self.names)} names for a {s.shape[0]}x{s.shape[0]} matrix")
        if not np.all(np.isfinite(s)):
            raise ArgumentError("strengths must be finite")
        s.setflags(write=False)
        object.__setattr__(self, "strengths", s)
        object.__setattr__(self, "names", tuple(str(n) for n in self.names))

    @property
    def size(self) -> int:
        return self.strengths.shape[0]

    def to_json(self) -> str:
        payload = {
            "names": list(self.names),
            "strengths": [[float(v) for v in row] for row in self.strengths],
            "normalized": self.normalized,
        }
        if self.floor_clamped:
            payload["floor_clamped"] = True
        return json.dumps(payload, indent=2) + "\n"

    def write_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(self.names)
            for row in self.strengths:
                w.writerow(["%.17g" % v for v in row])

    @classmethod
    def read_csv(cls, path) -> "CausalMatrix":
        names, rows = read_square_csv(path)
        return cls(np.array(rows, dtype=float), names)


def read_square_csv(path):
    """Read an ``M x M`` numeric CSV whose header holds the ``M`` names."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise FormatError(f"{path}: empty file")
        names = [h.strip() for h in header]
        rows = []
        for r, fields in enumerate(reader, 1):
            if not fields:
                continue
            if len(fields) != len(names):
                raise FormatError(f"{path}: expected {len(names)} fields", row=r)
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                raise FormatError(f"{path}: non-numeric field", row=r) from None
    if len(rows) != len(names):
        raise FormatError(f"{path}: expected {len(names)} rows, found {len(rows)}")
    return names, rows


def _residual_variance(res, config, U):
    traj = run_states(res, config, U)
    eps = residuals(traj, fit_readout(traj, config.ridge))
    return np.mean(eps**2, axis=0)


def restricted_variances(series: MaskedSeries, config: EsnConfig, n_jobs: int = 1):
    """Full-model variances ``v[i]`` and restricted ``vr[j, i]`` (input j withheld)."""
    if not series.fully_observed:
        raise DataError("series has missing cells; run impute first")
    m = series.n_vars
    if m < 2:
        raise ArgumentError("need at least 2 variables")
    U = np.asarray(series.values)
    for j, name in enumerate(series.names):
        if np.ptp(U[:, j]) == 0:
            raise DegenerateColumnError(f"column {name!r} is constant", columns=[name])
    res = build_reservoir(config, m)
    full = _residual_variance(res, config, U)

    tasks = [(res, config, U, j) for j in range(m)]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_restricted, tasks))
    else:
        results = [_restricted(t) for t in tasks]
    vr = np.empty((m, m))
    for j, row in results:
        vr[j] = row
    return full, vr


def _restricted(args):
    """Restricted variances for every target, including the withheld variable.

    The withheld column is no longer an input but stays a prediction target,
    so the restricted readout maps onto all ``M`` variables.
    """
    res, config, U, j = args
    m = U.shape[1]
    keep = [k for k in range(m) if k != j]
    traj = run_states(res.without_input(j), config, U[:, keep])
    traj = StateTrajectory(traj.Z, U[config.washout + 1 :])
    eps = residuals(traj, fit_readout(traj, config.ridge))
    return j, np.mean(eps**2, axis=0)


def gc_matrix(series: MaskedSeries, config: EsnConfig = None, n_jobs: int = 1) -> CausalMatrix:
    """ESN Granger-causality strengths for every ordered pair, diagonal included."""
    config = EsnConfig() if config is None else config
    full, vr = restricted_variances(series, config, n_jobs)
    return _log_ratio(full, vr, series.names)


def _log_ratio(full, vr, names) -> CausalMatrix:
    clamped = bool((full < VARIANCE_FLOOR).any() or (vr < VARIANCE_FLOOR).any())
    if clamped:
        log.warning("residual variance below %g clamped; strengths may be unreliable", VARIANCE_FLOOR)
    v = np.maximum(full, VARIANCE_FLOOR)
    r = np.maximum(vr, VARIANCE_FLOOR)
    return CausalMatrix(np.log(r / v[None, :]), names, floor_clamped=clamped)


def threshold(cm: CausalMatrix, tau: float) -> np.ndarray:
    """Binary adjacency: 1 where the strength is strictly above ``tau``."""
    return (cm.strengths > tau).astype(int)


def normalize_strengths(cm: CausalMatrix) -> CausalMatrix:
    s = cm.strengths
    lo, hi = s.min(), s.max()
    if not hi > lo:
        raise DegenerateColumnError("cannot normalize a constant strength matrix")
    return CausalMatrix((s - lo) / (hi - lo), cm.names, normalized=True, floor_clamped=cm.floor_clamped)
