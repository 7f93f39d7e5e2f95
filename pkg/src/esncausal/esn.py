"""Leaky-integrator echo state network with a ridge-regression readout.

The reservoir is a fixed sparse random matrix rescaled to a target spectral
radius. States follow

    x~(t) = tanh(W_in [1; u(t)] + W x(t-1))
    x(t)  = (1 - a) x(t-1) + a x~(t)

and the readout maps the extended state z(t) = [1; x(t); u(t)] to the next
input u(t+1).
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.linalg import eigs

from .errors import ArgumentError, FormatError, NumericalError

# Above this size the spectral radius comes from ARPACK instead of a dense solve.
DENSE_EIG_LIMIT = 200


@dataclass(frozen=True)
class EsnConfig:
    reservoir_size: int = 100
    leak_rate: float = 0.5
    spectral_radius: float = 0.9
    input_scaling: float = 0.5
    connectivity: float = 0.1
    ridge: float = 1e-4
    washout: int = 100
    seed: int = 0

    def __post_init__(self):
        if int(self.reservoir_size) != self.reservoir_size or self.reservoir_size < 1:
            raise ArgumentError(f"reservoir_size must be a positive integer, got {self.reservoir_size}")
        # a leak rate of 0 freezes the state; allowed so the edge case is testable
        if not 0.0 <= self.leak_rate <= 1.0:
            raise ArgumentError(f"leak_rate must lie in [0, 1], got {self.leak_rate}")
        if not 0.0 < self.spectral_radius < 1.0:
            raise ArgumentError(f"spectral_radius must lie in (0, 1), got {self.spectral_radius}")
        if not self.input_scaling > 0:
            raise ArgumentError(f"input_scaling must be > 0, got {self.input_scaling}")
        if not 0.0 < self.connectivity <= 1.0:
            raise ArgumentError(f"connectivity must lie in (0, 1], got {self.connectivity}")
        if not self.ridge >= 0:
            raise ArgumentError(f"ridge must be >= 0, got {self.ridge}")
        if int(self.washout) != self.washout or self.washout < 0:
            raise ArgumentError(f"washout must be a non-negative integer, got {self.washout}")
        object.__setattr__(self, "reservoir_size", int(self.reservoir_size))
        object.__setattr__(self, "washout", int(self.washout))
        object.__setattr__(self, "seed", int(self.seed))

    @classmethod
    def from_dict(cls, d: Optional[dict], **overrides) -> "EsnConfig":
        d = dict(d or {})
        names = {f.name for f in dataclasses.fields(cls)}
        extra = set(d) - names
        if extra:
            raise FormatError(f"unknown esn config keys: {sorted(extra)}")
        d.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**d)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def spectral_radius(W: np.ndarray) -> float:
    if W.shape[0] <= DENSE_EIG_LIMIT:
        return float(np.max(np.abs(np.linalg.eigvals(W))))
    vals = eigs(W, k=1, which="LM", return_eigenvectors=False, tol=1e-12, maxiter=10000)
    return float(np.abs(vals[0]))


@dataclass(frozen=True)
class Reservoir:
    """Frozen weights: ``W`` is square, ``W_in`` has a leading bias column."""

    W: np.ndarray
    W_in: np.ndarray

    @property
    def size(self) -> int:
        return self.W.shape[0]

    @property
    def input_dim(self) -> int:
        return self.W_in.shape[1] - 1

    def without_input(self, j: int) -> "Reservoir":
        """Same reservoir with input ``j`` (and only that input) disconnected."""
        if not 0 <= j < self.input_dim:
            raise ArgumentError(f"input index {j} out of range for {self.input_dim} inputs")
        return Reservoir(self.W, np.delete(self.W_in, 1 + j, axis=1))


def build_reservoir(config: EsnConfig, input_dim: int) -> Reservoir:
    """Draw ``W`` and ``W_in`` from ``config.seed``."""
    if input_dim < 1:
        raise ArgumentError(f"input_dim must be >= 1, got {input_dim}")
    n = config.reservoir_size
    rng = np.random.default_rng(config.seed)
    nnz = int(round(config.connectivity * n * n))
    W = np.zeros(n * n)
    pos = rng.choice(n * n, size=nnz, replace=False)
    W[pos] = rng.uniform(-1.0, 1.0, size=nnz)
    W = W.reshape(n, n)
    rho = spectral_radius(W) if nnz else 0.0
    if rho == 0.0:
        raise NumericalError(
            "reservoir matrix has zero spectral radius; raise connectivity or change the seed"
        )
    W *= config.spectral_radius / rho
    W_in = rng.uniform(-config.input_scaling, config.input_scaling, size=(n, 1 + input_dim))
    W.setflags(write=False)
    W_in.setflags(write=False)
    return Reservoir(W, W_in)


@dataclass(frozen=True)
class StateTrajectory:
    Z: np.ndarray  # T_eff x (1 + reservoir + inputs): rows [1, x(t), u(t)]
    targets: np.ndarray  # T_eff x inputs: rows u(t+1)


def _check_finite(U: np.ndarray) -> None:
    bad = ~np.isfinite(U)
    if bad.any():
        t, c = np.argwhere(bad)[0]
        raise NumericalError(f"non-finite input at t={t}, column={c}")


def collect_states(res: Reservoir, leak_rate: float, U: np.ndarray, x0=None) -> np.ndarray:
    """Run the reservoir over every row of ``U`` and return all N states."""
    U = np.asarray(U, dtype=float)
    _check_finite(U)
    n_steps = U.shape[0]
    drive = U @ res.W_in[:, 1:].T + res.W_in[:, 0]
    x = np.zeros(res.size) if x0 is None else np.array(x0, dtype=float)
    X = np.empty((n_steps, res.size))
    W = res.W
    a = leak_rate
    for t in range(n_steps):
        x = (1.0 - a) * x + a * np.tanh(drive[t] + W @ x)
        X[t] = x
    return X


def run_states(res: Reservoir, config: EsnConfig, U, x0=None) -> StateTrajectory:
    """Extended states after the washout paired with one-step-ahead targets."""
    U = np.asarray(U, dtype=float)
    if U.ndim != 2 or U.shape[1] != res.input_dim:
        raise ArgumentError(f"input must be N x {res.input_dim}, got {U.shape}")
    n = U.shape[0]
    if n <= config.washout + 1:
        raise ArgumentError(f"need more than washout + 1 = {config.washout + 1} rows, got {n}")
    X = collect_states(res, config.leak_rate, U, x0)
    keep = slice(config.washout, n - 1)
    Z = np.hstack([np.ones((n - 1 - config.washout, 1)), X[keep], U[keep]])
    return StateTrajectory(Z, U[config.washout + 1 :])


@dataclass(frozen=True)
class Readout:
    W_out: np.ndarray  # inputs x (1 + reservoir + inputs)
    ridge: float = 0.0

    def predict(self, Z: np.ndarray) -> np.ndarray:
        return Z @ self.W_out.T


def fit_readout(traj: StateTrajectory, ridge: float) -> Readout:
    """Ridge regression of targets on extended states; the bias column is unpenalized.

    Solved as the augmented least-squares problem ``[Z; sqrt(ridge) P] w = [Y; 0]``
    so the normal matrix is never formed.
    """
    Z, Y = traj.Z, traj.targets
    if Z.shape[0] < 1:
        raise ArgumentError("trajectory is empty")
    if ridge < 0:
        raise ArgumentError(f"ridge must be >= 0, got {ridge}")
    d = Z.shape[1]
    if ridge > 0:
        penalty = np.sqrt(ridge) * np.eye(d)[1:]
        A = np.vstack([Z, penalty])
        B = np.vstack([Y, np.zeros((d - 1, Y.shape[1]))])
    else:
        A, B = Z, Y
    coef, _, rank, _ = np.linalg.lstsq(A, B, rcond=None)
    if rank < d:
        raise NumericalError(
            f"readout normal matrix is singular (rank {rank} < {d}); use ridge > 0"
        )
    return Readout(coef.T, float(ridge))


def residuals(traj: StateTrajectory, readout: Readout) -> np.ndarray:
    if traj.Z.shape[1] != readout.W_out.shape[1]:
        raise ArgumentError("readout does not match the trajectory's state dimension")
    return traj.targets - readout.predict(traj.Z)
