"""Seeded synthetic systems with known causal graphs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import MaskedSeries
from .errors import ArgumentError


@dataclass(frozen=True)
class SyntheticSystem:
    series: MaskedSeries
    truth: np.ndarray  # truth[j, i] = 1 iff j -> i
    coefficients: np.ndarray  # A with u(t+1) = A u(t) + noise


def random_graph(n_vars: int, n_edges: int, seed: int) -> np.ndarray:
    """Adjacency with ``n_edges`` distinct off-diagonal edges drawn uniformly."""
    off = [(j, i) for j in range(n_vars) for i in range(n_vars) if i != j]
    if not 0 <= n_edges <= len(off):
        raise ArgumentError(f"cannot place {n_edges} edges among {n_vars} variables")
    rng = np.random.default_rng(seed)
    adj = np.zeros((n_vars, n_vars), dtype=int)
    for k in rng.choice(len(off), size=n_edges, replace=False):
        adj[off[k]] = 1
    return adj


def linear_var1(
    n_vars: int = 5,
    n_edges: int = 5,
    n_steps: int = 2000,
    seed: int = 0,
    graph_seed: int = 0,
    self_coef: float = 0.5,
    edge_coef: float = 0.5,
    noise_std: float = 1.0,
    burn_in: int = 200,
) -> SyntheticSystem:
    """Stable VAR(1) ``u(t+1) = A u(t) + e(t)`` on a random sparse graph.

    Every variable has autoregressive coefficient ``self_coef``; each edge
    ``j -> i`` gets ``A[i, j] = +/- edge_coef`` with a sign drawn from
    ``graph_seed``. The graph (and signs) are fixed by ``graph_seed``; the
    noise realisation by ``seed``.
    """
    truth = random_graph(n_vars, n_edges, graph_seed)
    signs = np.random.default_rng([graph_seed, 1]).choice([-1.0, 1.0], size=(n_vars, n_vars))
    A = self_coef * np.eye(n_vars) + edge_coef * signs * truth.T
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho >= 0.99:
        A *= 0.95 / rho
    rng = np.random.default_rng(seed)
    u = np.zeros(n_vars)
    out = np.empty((n_steps, n_vars))
    for t in range(burn_in + n_steps):
        u = A @ u + noise_std * rng.standard_normal(n_vars)
        if t >= burn_in:
            out[t - burn_in] = u
    return SyntheticSystem(MaskedSeries.from_array(out), truth, A)


def white_noise(n_vars: int = 5, n_steps: int = 2000, seed: int = 0) -> MaskedSeries:
    rng = np.random.default_rng(seed)
    return MaskedSeries.from_array(rng.standard_normal((n_steps, n_vars)))


def driven_pair(n_steps: int = 2000, seed: int = 0, gain: float = 0.8, noise: float = 0.1):
    """``u2(t+1) = gain * u1(t) + noise * e(t)`` with white-noise ``u1``."""
    rng = np.random.default_rng(seed)
    u1 = rng.standard_normal(n_steps)
    u2 = np.empty(n_steps)
    u2[0] = noise * rng.standard_normal()
    u2[1:] = gain * u1[:-1] + noise * rng.standard_normal(n_steps - 1)
    return MaskedSeries.from_array(np.column_stack([u1, u2]), names=["u1", "u2"])


def sinusoids(n_steps: int = 500, seed: int = 0, noise: float = 0.05, n_vars: int = 1):
    """Sum of two sinusoids per column with relative Gaussian noise."""
    rng = np.random.default_rng(seed)
    t = np.arange(n_steps, dtype=float)
    cols = []
    for _ in range(n_vars):
        p1, p2 = rng.uniform(30, 80), rng.uniform(10, 25)
        ph1, ph2 = rng.uniform(0, 2 * np.pi, size=2)
        clean = np.sin(2 * np.pi * t / p1 + ph1) + 0.5 * np.sin(2 * np.pi * t / p2 + ph2)
        cols.append(clean + noise * clean.std() * rng.standard_normal(n_steps))
    return MaskedSeries.from_array(np.column_stack(cols))
