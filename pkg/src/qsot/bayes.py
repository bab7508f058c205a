"""Bayesian inverses of processes, their verification, and the Petz recovery map.

A Bayesian inverse ``F`` of ``(E, rho)`` satisfies ``E * rho = S(F * E(rho))``.
Equivalently ``F({E(rho), Y}) = {rho, E^*(Y)}`` for every ``Y``, which pins
``F`` down uniquely once ``E(rho)`` is invertible. Two independent solvers are
provided: one in the eigenbasis of ``E(rho)`` at the level of the map, and one
that solves the Choi-level Sylvester equation

    {E(rho)^T (x) 1, C[F]} = {1 (x) rho, C[E^*]}.

Neither regularizes a singular prediction; both raise RankDeficientPrediction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .channel import ChoiMap, KrausChannel, Process, choi_from_map, kraus_from_choi
from .errors import DimMismatch, RankDeficientPrediction
from .linalg import dag
from .observable import LightTouchBasis, light_touch_basis
from .spacetime import star, swap, ttev

RANK_THRESHOLD = 1e-10
CP_TOL = 1e-9


def _denominators(q: np.ndarray) -> np.ndarray:
    den = q[:, None] + q[None, :]
    if den.min() <= RANK_THRESHOLD:
        raise RankDeficientPrediction(
            f"predicted state is rank deficient (smallest q_k + q_l = {den.min():.3e})"
        )
    return den


def bayes_candidate_eigen(process: Process) -> ChoiMap:
    """Candidate from ``F(|w_k><w_l|) = {rho, E^*(|w_k><w_l|)} / (q_k + q_l)``."""
    ch = process.channel
    rho = process.prior
    dec = linalg.eigh(process.prediction())
    q, w = dec.eigenvalues, dec.eigenvectors
    den = _denominators(q)

    def f(y):
        coords = dag(w) @ y @ w / den
        return linalg.anticommutator(rho, ch.adjoint_apply(w @ coords @ dag(w)))

    return ChoiMap(choi_from_map(f, ch.dim_out), ch.dim_out, ch.dim_in)


def bayes_candidate_sylvester(process: Process) -> ChoiMap:
    """Candidate from the anticommutator (Sylvester) equation on Choi matrices.

    Solved exactly in the eigenbasis of ``E(rho)^T (x) 1``:
    ``X_kl = B_kl / (a_k + a_l)``.
    """
    ch = process.channel
    d_a, d_b = ch.dim_in, ch.dim_out
    rho = process.prior
    lhs_op = linalg.tensor(process.prediction().T, np.eye(d_a))
    adj_choi = choi_from_map(ch.adjoint_apply, d_b)
    rhs = linalg.anticommutator(linalg.tensor(np.eye(d_b), rho), adj_choi)
    dec = linalg.eigh(lhs_op)
    a, v = dec.eigenvalues, dec.eigenvectors
    den = _denominators(a)
    x = v @ ((dag(v) @ rhs @ v) / den) @ dag(v)
    return ChoiMap(x, d_b, d_a)


@dataclass(frozen=True)
class NoInverse:
    """Returned when the Bayes candidate is not completely positive."""

    min_choi_eig: float
    candidate: ChoiMap

    def __bool__(self) -> bool:
        return False


def choi_min_eig(f) -> float:
    c = f.choi()
    return linalg.min_eigenvalue(0.5 * (c + dag(c)))


def candidate_is_cp(f, tol: float = CP_TOL) -> bool:
    c = f.choi()
    return linalg.is_psd(0.5 * (c + dag(c)), tol)


def bayesian_inverse(process: Process, tol: float = CP_TOL) -> KrausChannel | NoInverse:
    """The Bayesian inverse as a Kraus channel, or :class:`NoInverse` if the candidate is not CP."""
    cand = bayes_candidate_eigen(process)
    if not candidate_is_cp(cand, tol):
        return NoInverse(choi_min_eig(cand), cand)
    return kraus_from_choi(cand.choi(), cand.dim_in, cand.dim_out, tol=max(tol, 1e-9))


def defining_residual(process: Process, f) -> float:
    """``|E * rho - S(F * E(rho))|`` in operator norm."""
    forward = star(process)
    backward = star(process.reverse(f))
    return linalg.op_norm(forward.mat - swap(backward))


def operational_symmetry_check(
    process: Process,
    f,
    basis: tuple[Sequence, Sequence] | None = None,
) -> float:
    """Largest ``|<A_i, B_j>_(E, rho) - <B_j, A_i>_(F, E(rho))|`` over the basis pairs.

    Both sides use the operational definition, never the state over time.
    Defaults to light-touch bases of both systems.
    """
    d_a, d_b = process.dims
    if (f.dim_in, f.dim_out) != (d_b, d_a):
        raise DimMismatch("reverse map must go from the output system back to the input")
    if basis is None:
        basis = (light_touch_basis(d_a), light_touch_basis(d_b))
    basis_a, basis_b = basis
    rev = process.reverse(f)
    worst = 0.0
    for oa in basis_a:
        for ob in basis_b:
            worst = max(worst, abs(ttev(process, oa, ob) - ttev(rev, ob, oa)))
    return worst


@dataclass(frozen=True)
class BayesReport:
    candidate: object
    is_cp: bool
    min_choi_eig: float
    defining_eq_residual: float
    symmetry_residual: float
    tol: float

    @property
    def is_bayes(self) -> bool:
        return self.defining_eq_residual <= self.tol


def verify_bayes(process: Process, f, tol: float | None = None,
                 basis: tuple[LightTouchBasis, LightTouchBasis] | None = None) -> BayesReport:
    tol = linalg.default_tol() if tol is None else tol
    if (f.dim_in, f.dim_out) != (process.dims[1], process.dims[0]):
        raise DimMismatch("reverse map must go from the output system back to the input")
    return BayesReport(
        candidate=f,
        is_cp=candidate_is_cp(f, tol),
        min_choi_eig=choi_min_eig(f),
        defining_eq_residual=defining_residual(process, f),
        symmetry_residual=operational_symmetry_check(process, f, basis),
        tol=tol,
    )


def petz(process: Process) -> KrausChannel:
    """Petz recovery map with Kraus operators ``rho^(1/2) E_a^dag E(rho)^(-1/2)``.

    A singular ``E(rho)`` is handled with the pseudo-inverse square root.
    """
    ch = process.channel
    if not isinstance(ch, KrausChannel):
        raise TypeError("petz needs a Kraus channel")
    root = linalg.msqrt(process.prior)
    inv_root = linalg.pinv_sqrt(process.prediction())
    return KrausChannel([root @ dag(k) @ inv_root for k in ch.kraus])
