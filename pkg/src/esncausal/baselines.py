"""Linear comparison methods: VAR-based Granger causality and SLARAC.

Both return a :class:`~esncausal.gc.CausalMatrix` with ``strengths[j, i]``
scoring ``j -> i``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import MaskedSeries
from .errors import ArgumentError, DataError, NumericalError
from .gc import CausalMatrix, _log_ratio


@dataclass(frozen=True)
class VarModel:
    """``u(t) = c + sum_k A[k] u(t-k) + e(t)`` with ``A[k][i, j]`` the effect of j on i."""

    coefs: np.ndarray  # P x M x M
    intercept: np.ndarray
    sigma: np.ndarray  # residual covariance, divided by N - P
    resid: np.ndarray

    @property
    def order(self) -> int:
        return self.coefs.shape[0]


def lag_matrix(U: np.ndarray, order: int) -> np.ndarray:
    """Rows ``[1, u(t-1), ..., u(t-P)]`` for ``t = P .. N-1``."""
    n, m = U.shape
    cols = [np.ones((n - order, 1))]
    cols += [U[order - k : n - k] for k in range(1, order + 1)]
    return np.hstack(cols)


def _lstsq(X, Y, order):
    coef, _, rank, _ = np.linalg.lstsq(X, Y, rcond=None)
    if rank < X.shape[1]:
        raise NumericalError(
            f"VAR({order}) regressors are rank deficient ({rank} < {X.shape[1]}); "
            "try a smaller order"
        )
    return coef


def _values(series) -> np.ndarray:
    if isinstance(series, MaskedSeries):
        if not series.fully_observed:
            raise DataError("series has missing cells; run impute first")
        return np.asarray(series.values)
    return np.asarray(series, dtype=float)


def fit_var(series, order: int) -> VarModel:
    U = _values(series)
    n, m = U.shape
    if order < 1:
        raise ArgumentError(f"VAR order must be >= 1, got {order}")
    if n <= m * order + 1:
        raise ArgumentError(f"VAR({order}) on {m} variables needs more than {m * order + 1} rows")
    X = lag_matrix(U, order)
    Y = U[order:]
    B = _lstsq(X, Y, order)
    E = Y - X @ B
    coefs = B[1:].reshape(order, m, m).transpose(0, 2, 1)
    return VarModel(coefs, B[0], E.T @ E / (n - order), E)


def mvgc_matrix(series, order: int = 2, names: Sequence[str] = None) -> CausalMatrix:
    """Log ratio of restricted to full VAR residual variances.

    The restricted model for ``j`` drops every lag of ``j`` from all
    equations, so the same fit serves every target, including ``j`` itself.
    """
    U = _values(series)
    n, m = U.shape
    if names is None:
        names = series.names if isinstance(series, MaskedSeries) else [f"x{k + 1}" for k in range(m)]
    full = fit_var(U, order)
    v = np.mean(full.resid**2, axis=0)
    X = lag_matrix(U, order)
    Y = U[order:]
    vr = np.empty((m, m))
    for j in range(m):
        keep = [0] + [1 + k * m + c for k in range(order) for c in range(m) if c != j]
        Xr = X[:, keep]
        E = Y - Xr @ _lstsq(Xr, Y, order)
        vr[j] = np.mean(E**2, axis=0)
    return _log_ratio(v, vr, names)


def _draw_subsample(rng, n, m, max_lag, max_tries=20):
    for _ in range(max_tries):
        lag = int(rng.integers(1, max_lag + 1))
        length = int(rng.integers(math.ceil(0.5 * n), n + 1))
        start = int(rng.integers(0, n - length + 1))
        if length > m * lag + 1:
            return lag, start, length
    raise ArgumentError(
        f"could not draw a window long enough for a VAR fit after {max_tries} tries; "
        "lower max_lag"
    )


def _slarac_one(U, max_lag, seed, index):
    n, m = U.shape
    rng = np.random.default_rng([seed, index])
    lag, start, length = _draw_subsample(rng, n, m, max_lag)
    model = fit_var(U[start : start + length], lag)
    # coefs[k, i, j]: effect of j on i at lag k+1 -> score[j, i]
    return np.abs(model.coefs).max(axis=0).T


def slarac_matrix(
    series,
    max_lag: int = 5,
    n_subsamples: int = 100,
    seed: int = 0,
    names: Sequence[str] = None,
    n_jobs: int = 1,
) -> CausalMatrix:
    """Average over random (lag, window) VAR fits of the largest absolute lag coefficient.

    Subsample ``k`` draws its randomness from ``(seed, k)`` alone, so the result
    does not depend on ``n_jobs``.
    """
    U = _values(series)
    n, m = U.shape
    if names is None:
        names = series.names if isinstance(series, MaskedSeries) else [f"x{k + 1}" for k in range(m)]
    if max_lag < 1 or n_subsamples < 1:
        raise ArgumentError("max_lag and n_subsamples must be >= 1")
    if n <= max_lag + 2:
        raise ArgumentError(f"need more than max_lag + 2 = {max_lag + 2} rows")
    idx = range(n_subsamples)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(lambda k: _slarac_one(U, max_lag, seed, k), idx))
    else:
        parts = [_slarac_one(U, max_lag, seed, k) for k in idx]
    total = np.zeros((m, m))
    for p in parts:  # fixed summation order keeps results schedule-independent
        total += p
    return CausalMatrix(total / n_subsamples, names)
