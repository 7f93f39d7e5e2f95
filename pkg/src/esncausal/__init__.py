"""Granger-causal discovery on time series with missing entries.

Gaps are filled by Gaussian process regression over the time index, then a
leaky echo state network scores each ordered pair of variables by how much
withholding the source degrades one-step prediction of the target.
"""

from .baselines import fit_var, mvgc_matrix, slarac_matrix
from .data import MaskedSeries, contaminate, load_csv, standardize, write_csv
from .errors import (
    ArgumentError,
    DataError,
    DegenerateColumnError,
    EsnCausalError,
    FormatError,
    NumericalError,
)
from .esn import EsnConfig, build_reservoir, fit_readout, residuals, run_states
from .gc import CausalMatrix, gc_matrix, normalize_strengths, threshold
from .gpr import KernelFamily, KernelSpec, impute
from .metrics import best_f1_threshold, confusion, evaluate, mcc, roc

__version__ = "0.1.0"
