"""Seeded random states, unitaries and channels for tests and probes."""

from __future__ import annotations

import numpy as np

from .channel import KrausChannel
from .linalg import dag


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return rng.normal(size=(rows, cols)) + 1j * rng.normal(size=(rows, cols))


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary (QR of a Ginibre matrix with phase correction)."""
    q, r = np.linalg.qr(_ginibre(rng, d, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_density(d: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Random density matrix ``G G^dag / Tr``; full rank unless ``rank`` is given."""
    g = _ginibre(rng, d, rank or d)
    rho = g @ dag(g)
    rho = rho / np.trace(rho).real
    return 0.5 * (rho + dag(rho))


def random_channel(d_in: int, d_out: int, n_kraus: int, rng: np.random.Generator) -> KrausChannel:
    """CPTP map from the blocks of a random isometry ``C^d_in -> C^(n_kraus d_out)``."""
    v, _ = np.linalg.qr(_ginibre(rng, n_kraus * d_out, d_in))
    return KrausChannel([v[a * d_out:(a + 1) * d_out] for a in range(n_kraus)])


def random_stochastic(n_out: int, n_in: int, rng: np.random.Generator) -> np.ndarray:
    """Column-stochastic matrix ``P[y, x] = P(y | x)`` with strictly positive entries."""
    p = rng.uniform(0.05, 1.0, size=(n_out, n_in))
    return p / p.sum(axis=0)


def classical_channel(p: np.ndarray) -> KrausChannel:
    """Kraus operators ``sqrt(P(y|x)) |y><x|`` of a classical stochastic map."""
    n_out, n_in = p.shape
    ops = []
    for y in range(n_out):
        for x in range(n_in):
            k = np.zeros((n_out, n_in))
            k[y, x] = np.sqrt(p[y, x])
            ops.append(k)
    return KrausChannel(ops)
