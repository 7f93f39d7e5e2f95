"""Stage functions composing the library into the fill-then-discover workflow.

The CLI is a thin layer over these; they are also convenient from Python.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import gpr
from .baselines import mvgc_matrix, slarac_matrix
from .data import MaskedSeries, standardize
from .errors import ArgumentError, DataError
from .esn import EsnConfig
from .gc import CausalMatrix, gc_matrix, normalize_strengths

METHODS = ("esn", "mvgc", "slarac")
CONFIG_BLOCKS = ("gpr", "esn", "slarac", "mvgc", "eval")


def load_config(path) -> dict:
    """Read a JSON config; errors carry the parse location."""
    if path is None:
        return {}
    path = Path(path)
    if not path.is_file():
        raise ArgumentError(f"config file not found: {path}")
    try:
        cfg = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ArgumentError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    if not isinstance(cfg, dict):
        raise ArgumentError(f"{path}: top level must be a JSON object")
    return cfg


def config_block(cfg: dict, name: str) -> dict:
    """``cfg[name]`` for a combined config, or ``cfg`` itself for a bare block."""
    if any(k in cfg for k in CONFIG_BLOCKS):
        block = cfg.get(name) or {}
    else:
        block = cfg
    if not isinstance(block, dict):
        raise ArgumentError(f"config block {name!r} must be a JSON object")
    return block


@dataclass
class ImputeResult:
    filled: MaskedSeries
    chosen: dict
    rmse: Optional[float] = None
    mean_fill_rmse: Optional[float] = None


def impute_series(series: MaskedSeries, grid=None, removed=None, n_jobs: int = 1) -> ImputeResult:
    """Standardize, GP-fill, map back; observed cells are copied verbatim.

    When ``removed`` cells are given, the RMSE of the fill and of a
    column-mean fill over those cells is reported in original units.
    """
    z, st = standardize(series)
    filled_z, chosen = gpr.impute(z, grid, n_jobs=n_jobs)
    back = st.invert(filled_z).values
    values = np.where(series.mask, series.values, back)
    filled = series.replace(values=values, mask=np.ones(series.shape, dtype=bool))
    result = ImputeResult(filled, chosen)
    if removed:
        rows = np.array([c.row for c in removed])
        cols = np.array([c.col for c in removed])
        truth = np.array([c.value for c in removed])
        result.rmse = float(np.sqrt(np.mean((values[rows, cols] - truth) ** 2)))
        result.mean_fill_rmse = float(np.sqrt(np.mean((st.mean[cols] - truth) ** 2)))
    return result


def discover(
    series: MaskedSeries,
    method: str = "esn",
    esn_config: Optional[EsnConfig] = None,
    var_order: int = 2,
    max_lag: int = 5,
    n_subsamples: int = 100,
    slarac_seed: int = 0,
    normalize: bool = False,
    n_jobs: int = 1,
) -> CausalMatrix:
    """Strength matrix for ``method`` on a fully observed series (standardized first)."""
    if method not in METHODS:
        raise ArgumentError(f"unknown method {method!r}; valid methods: {', '.join(METHODS)}")
    if not series.fully_observed:
        raise DataError(
            f"input has {series.mask.size - series.observed_count()} missing cells; run impute first"
        )
    z, _ = standardize(series)
    if method == "esn":
        cm = gc_matrix(z, esn_config or EsnConfig(), n_jobs=n_jobs)
    elif method == "mvgc":
        cm = mvgc_matrix(z, var_order)
    else:
        cm = slarac_matrix(z, max_lag, n_subsamples, slarac_seed, n_jobs=n_jobs)
    return normalize_strengths(cm) if normalize else cm


def parse_methods(text: str) -> Sequence[str]:
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise ArgumentError(
            f"unknown method(s) {', '.join(bad) or '(none)'}; valid methods: {', '.join(METHODS)}"
        )
    return methods
