"""Gaussian process regression over the time index, used to fill gaps.

Each column of a standardized series is treated as a noisy sample of a
zero-mean GP indexed by row number. Kernel hyperparameters are picked from a
grid by log marginal likelihood and masked cells are replaced by the
posterior mean.
"""

from __future__ import annotations

import dataclasses
import enum
import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .data import MaskedSeries
from .errors import ArgumentError, DegenerateColumnError, FormatError, NumericalError

LOG_2PI = math.log(2.0 * math.pi)

# Diagonal jitter ladder, as multiples of the signal variance.
JITTER_START = 1e-10
JITTER_MAX = 1e-4


class KernelFamily(str, enum.Enum):
    SQUARED_EXPONENTIAL = "SquaredExponential"
    PERIODIC = "Periodic"
    SQUARED_EXPONENTIAL_PLUS_PERIODIC = "SquaredExponentialPlusPeriodic"


@dataclass(frozen=True)
class KernelSpec:
    family: KernelFamily = KernelFamily.SQUARED_EXPONENTIAL
    signal_variance: float = 1.0
    length_scale: float = 1.0
    period: Optional[float] = None
    noise_variance: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if not self.signal_variance > 0:
            raise ArgumentError(f"signal_variance must be > 0, got {self.signal_variance}")
        if not self.length_scale > 0:
            raise ArgumentError(f"length_scale must be > 0, got {self.length_scale}")
        if not self.noise_variance >= 0:
            raise ArgumentError(f"noise_variance must be >= 0, got {self.noise_variance}")
        if self.family is not KernelFamily.SQUARED_EXPONENTIAL:
            if self.period is None or not self.period > 0:
                raise ArgumentError(f"{self.family.value} kernel needs a period > 0")

    @property
    def prior_variance(self) -> float:
        """k(x, x) for this kernel."""
        if self.family is KernelFamily.SQUARED_EXPONENTIAL_PLUS_PERIODIC:
            return 2.0 * self.signal_variance
        return self.signal_variance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["family"] = self.family.value
        return d


def _kernel(spec: KernelSpec, d: np.ndarray) -> np.ndarray:
    """Kernel as a function of the (broadcast) difference ``d = x - x'``."""
    out = np.zeros(np.shape(d))
    fam = spec.family
    if fam in (KernelFamily.SQUARED_EXPONENTIAL, KernelFamily.SQUARED_EXPONENTIAL_PLUS_PERIODIC):
        out = out + spec.signal_variance * np.exp(-0.5 * (d / spec.length_scale) ** 2)
    if fam in (KernelFamily.PERIODIC, KernelFamily.SQUARED_EXPONENTIAL_PLUS_PERIODIC):
        s = np.sin(np.pi * np.abs(d) / spec.period)
        out = out + spec.signal_variance * np.exp(-2.0 * s**2 / spec.length_scale**2)
    return out


def kernel_eval(spec: KernelSpec, x: float, x_prime: float) -> float:
    return float(_kernel(spec, np.asarray(x, float) - np.asarray(x_prime, float)))


def cross_kernel(spec: KernelSpec, xa, xb) -> np.ndarray:
    xa = np.asarray(xa, dtype=float)
    xb = np.asarray(xb, dtype=float)
    return _kernel(spec, xa[:, None] - xb[None, :])


def gram_matrix(spec: KernelSpec, xs) -> np.ndarray:
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    if xs.size == 0:
        raise ArgumentError("gram_matrix needs at least one input")
    return cross_kernel(spec, xs, xs)


def _cholesky_with_jitter(A: np.ndarray, scale: float):
    """Lower Cholesky factor of ``A``, escalating diagonal jitter on failure."""
    diag = A.diagonal().copy()
    idx = np.diag_indices_from(A)
    jitter = 0.0
    while True:
        A[idx] = diag + jitter
        try:
            return cholesky(A, lower=True, check_finite=False), jitter
        except LinAlgError:
            pass
        jitter = JITTER_START * scale if jitter == 0.0 else jitter * 10.0
        if jitter > JITTER_MAX * scale * (1 + 1e-9):
            raise NumericalError(
                f"Cholesky factorization failed even with diagonal jitter {JITTER_MAX * scale:g}"
            )


@dataclass(frozen=True)
class GprPosterior:
    x_train: np.ndarray
    y_train: np.ndarray
    chol: np.ndarray
    weights: np.ndarray
    jitter: float = 0.0


def fit_posterior(spec: KernelSpec, x_t, y_t, gram=None) -> GprPosterior:
    """Factor ``K(x_t, x_t) + noise * I`` and precompute ``(K + noise I)^-1 y``.

    ``gram`` may carry a precomputed noise-free ``K(x_t, x_t)``.
    """
    x_t = np.atleast_1d(np.asarray(x_t, dtype=float))
    y_t = np.atleast_1d(np.asarray(y_t, dtype=float))
    if x_t.shape != y_t.shape or x_t.ndim != 1 or x_t.size == 0:
        raise ArgumentError("x_t and y_t must be non-empty vectors of equal length")
    K = gram_matrix(spec, x_t) if gram is None else np.array(gram)
    K[np.diag_indices_from(K)] += spec.noise_variance
    L, jitter = _cholesky_with_jitter(K, spec.prior_variance)
    w = cho_solve((L, True), y_t)
    return GprPosterior(x_t, y_t, L, w, jitter)


def predict_mean(post: GprPosterior, spec: KernelSpec, x_star) -> np.ndarray:
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    return cross_kernel(spec, x_star, post.x_train) @ post.weights


def predict_variance(post: GprPosterior, spec: KernelSpec, x_star) -> np.ndarray:
    """Diagonal of the posterior covariance at ``x_star``."""
    x_star = np.atleast_1d(np.asarray(x_star, dtype=float))
    Ks = cross_kernel(spec, post.x_train, x_star)
    v = solve_triangular(post.chol, Ks, lower=True)
    return spec.prior_variance - np.einsum("ij,ij->j", v, v)


def log_marginal_likelihood(spec: KernelSpec, x_t, y_t, gram=None) -> float:
    post = fit_posterior(spec, x_t, y_t, gram)
    n = post.y_train.size
    logdet = 2.0 * np.log(np.diag(post.chol)).sum()
    return float(-0.5 * post.y_train @ post.weights - 0.5 * logdet - 0.5 * n * LOG_2PI)


def select_hyperparameters(column, grid: Sequence[KernelSpec]) -> KernelSpec:
    """Pick the grid entry with the highest evidence on a column's observed cells.

    ``column`` is a 1-D array indexed by time with ``NaN`` at missing cells.
    Ties go to the earliest grid entry.
    """
    column = np.asarray(column, dtype=float)
    t = np.flatnonzero(np.isfinite(column))
    if t.size < 2:
        raise DegenerateColumnError("need at least 2 observed points to select a kernel")
    return _select(t.astype(float), column[t], grid)


def _select(x_t, y_t, grid):
    if len(grid) == 0:
        raise ArgumentError("hyperparameter grid is empty")
    best, best_ll = None, -math.inf
    grams = {}
    for spec in grid:
        # the noise-free Gram matrix is shared by every noise level
        key = dataclasses.replace(spec, noise_variance=0.0)
        if key not in grams:
            grams[key] = gram_matrix(key, x_t)
        try:
            ll = log_marginal_likelihood(spec, x_t, y_t, grams[key])
        except NumericalError:
            continue
        if ll > best_ll:
            best, best_ll = spec, ll
    if best is None:
        raise NumericalError("no kernel in the grid could be fitted")
    return best


DEFAULT_LENGTH_SCALES = (1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0)
DEFAULT_NOISE_VARIANCES = (1e-4, 1e-2, 1e-1)


def kernel_grid(
    family=KernelFamily.SQUARED_EXPONENTIAL,
    length_scales=DEFAULT_LENGTH_SCALES,
    noise_variances=DEFAULT_NOISE_VARIANCES,
    period=None,
    signal_variances=(1.0,),
) -> List[KernelSpec]:
    """Cartesian product of the given hyperparameter values, in a fixed order."""
    families = [family] if isinstance(family, (str, KernelFamily)) else list(family)
    periods = period if isinstance(period, (list, tuple)) else [period]
    return [
        KernelSpec(f, sv, ls, p, nv)
        for f, p, ls, sv, nv in itertools.product(
            families, periods, length_scales, signal_variances, noise_variances
        )
    ]


def grid_from_config(cfg: Optional[dict]) -> List[KernelSpec]:
    """Build a grid from a ``{family, length_scales, noise_variances, period?}`` block."""
    if not cfg:
        return kernel_grid()
    known = {"family", "length_scales", "noise_variances", "period", "signal_variances"}
    extra = set(cfg) - known
    if extra:
        raise FormatError(f"unknown gpr config keys: {sorted(extra)}")
    try:
        return kernel_grid(
            family=cfg.get("family", KernelFamily.SQUARED_EXPONENTIAL),
            length_scales=tuple(cfg.get("length_scales", DEFAULT_LENGTH_SCALES)),
            noise_variances=tuple(cfg.get("noise_variances", DEFAULT_NOISE_VARIANCES)),
            period=cfg.get("period"),
            signal_variances=tuple(cfg.get("signal_variances", (1.0,))),
        )
    except (ValueError, TypeError) as exc:
        raise FormatError(f"invalid gpr config: {exc}") from None


def impute_column(t, y, missing_rows, grid):
    spec = _select(t, y, grid)
    post = fit_posterior(spec, t, y)
    return predict_mean(post, spec, missing_rows), spec


def impute(series: MaskedSeries, grid: Optional[Sequence[KernelSpec]] = None, n_jobs: int = 1):
    """Fill every masked cell with the GP posterior mean of its column.

    Returns ``(filled_series, chosen)`` where ``chosen`` maps column name to
    the selected :class:`KernelSpec` (``None`` for columns without gaps).
    Observed cells are copied through untouched.
    """
    grid = kernel_grid() if grid is None else list(grid)
    values = np.array(series.values)
    chosen = {}

    def work(j):
        missing = np.flatnonzero(~series.mask[:, j])
        if missing.size == 0:
            return j, None, None, None
        t, y = series.column(j)
        if y.size < 2:
            name = series.names[j]
            raise DegenerateColumnError(
                f"column {name!r} has fewer than 2 observed values", columns=[name]
            )
        mean, spec = impute_column(t, y, missing.astype(float), grid)
        return j, missing, mean, spec

    cols = range(series.n_vars)
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(work, cols))
    else:
        results = [work(j) for j in cols]
    for j, missing, mean, spec in results:
        chosen[series.names[j]] = spec
        if missing is not None:
            values[missing, j] = mean
    return series.replace(values=values, mask=np.ones(series.shape, dtype=bool)), chosen


def hyperparameters_json(chosen: dict) -> str:
    payload = {k: (None if v is None else v.to_dict()) for k, v in chosen.items()}
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"
