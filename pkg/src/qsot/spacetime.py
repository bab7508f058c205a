"""States over time and two-time expectation values.

``ttev`` is the ground truth: it follows the measure / evolve / measure
recipe with Lueders projections and works for any observables.
``ttev_fast`` reads the same number off the state over time
``E * rho = {rho (x) 1, J[E]} / 2`` and is only valid for light-touch pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .channel import Process, jamiolkowski
from .errors import DimMismatch, NotLightTouch
from .linalg import as_matrix
from .observable import as_observable, is_light_touch, pauli, spectral_projectors


@dataclass(frozen=True)
class StateOverTime:
    """Hermitian, unit-trace operator on A (x) B. Not necessarily positive."""

    mat: np.ndarray
    dims: tuple[int, int]

    def marginal(self, keep: int) -> np.ndarray:
        return linalg.partial_trace(self.mat, self.dims, keep)

    def expectation(self, oa, ob) -> float:
        a = as_matrix(getattr(oa, "mat", oa))
        b = as_matrix(getattr(ob, "mat", ob))
        return float(np.trace(self.mat @ linalg.tensor(a, b)).real)

    def min_eigenvalue(self) -> float:
        return linalg.min_eigenvalue(self.mat)


def star(process: Process) -> StateOverTime:
    """Canonical spatiotemporal product ``{rho (x) 1_B, J[E]} / 2``."""
    ch = process.channel
    left = linalg.tensor(process.prior, np.eye(ch.dim_out))
    m = 0.5 * linalg.anticommutator(left, jamiolkowski(ch))
    return StateOverTime(m, (ch.dim_in, ch.dim_out))


def star_ls(process: Process) -> StateOverTime:
    """Leifer-Spekkens product ``(sqrt(rho) (x) 1) J[E] (sqrt(rho) (x) 1)``."""
    ch = process.channel
    root = linalg.tensor(linalg.msqrt(process.prior), np.eye(ch.dim_out))
    return StateOverTime(root @ jamiolkowski(ch) @ root, (ch.dim_in, ch.dim_out))


def swap(m, dims: tuple[int, int] | None = None) -> np.ndarray:
    """Swap map ``S(x (x) y) = y (x) x`` on a matrix over B (x) A; ``dims = (d_B, d_A)``."""
    if isinstance(m, StateOverTime):
        dims = m.dims
        m = m.mat
    if dims is None:
        raise ValueError("swap needs dims for a bare matrix")
    return linalg.swap_factors(m, dims)


def _check_dims(process: Process, oa, ob) -> None:
    d_a, d_b = process.dims
    if oa.dim != d_a or ob.dim != d_b:
        raise DimMismatch(f"observables of dims ({oa.dim}, {ob.dim}) do not fit process dims ({d_a}, {d_b})")


def ttev(process: Process, oa, ob) -> float:
    """``sum_i lam_i Tr[E(P_i rho P_i) O_B]`` over the spectral decomposition of ``O_A``."""
    oa = as_observable(oa)
    ob = as_observable(ob)
    _check_dims(process, oa, ob)
    rho = process.prior
    total = 0.0
    for lam, proj in spectral_projectors(oa):
        out = process.channel.apply(proj @ rho @ proj)
        total += lam * np.trace(out @ ob.mat).real
    return float(total)


def ttev_fast(process: Process, oa, ob) -> float:
    """``Tr[(E * rho)(O_A (x) O_B)]``; raises NotLightTouch outside its domain of validity."""
    oa = as_observable(oa)
    ob = as_observable(ob)
    _check_dims(process, oa, ob)
    if not is_light_touch(oa):
        raise NotLightTouch("first observable is not light-touch")
    if not is_light_touch(ob):
        raise NotLightTouch("second observable is not light-touch")
    return star(process).expectation(oa, ob)


def ttev_table(process: Process) -> np.ndarray:
    """4x4 matrix with entry ``(a, b) = <sigma_a, sigma_b>`` for a qubit process."""
    if process.dims != (2, 2):
        raise DimMismatch("ttev_table needs a qubit-to-qubit process")
    paulis = [pauli(k) for k in range(4)]
    return np.array([[ttev(process, pa, pb) for pb in paulis] for pa in paulis])


def pauli_expectations(state: StateOverTime) -> np.ndarray:
    """4x4 matrix of ``Tr[state (sigma_a (x) sigma_b)]``."""
    if state.dims != (2, 2):
        raise DimMismatch("pauli_expectations needs a two-qubit operator")
    paulis = [pauli(k) for k in range(4)]
    return np.array([[state.expectation(pa, pb) for pb in paulis] for pa in paulis])
