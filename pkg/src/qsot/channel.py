"""Quantum channels as Kraus families, plus general linear maps held by their Choi matrix.

Two map types share one duck-typed surface (``dim_in``, ``dim_out``,
``apply``, ``adjoint_apply``, ``choi``):

* :class:`KrausChannel` - completely positive by construction.
* :class:`ChoiMap` - any linear map, stored as its Choi matrix. Bayesian
  inverse *candidates* live here until they pass the positivity check.

Channels are compared through their Choi matrices, never through Kraus lists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import linalg
from .errors import DimMismatch, NotPSD, NotUnitary, ParamOutOfRange
from .linalg import as_matrix, dag

KRAUS_RANK_REL = 1e-11


def _check_param(name: str, value: float) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0) or not np.isfinite(value):
        raise ParamOutOfRange(f"{name} must lie in [0, 1], got {value}")
    return value


@dataclass(frozen=True)
class KrausChannel:
    """A map ``rho -> sum_a K_a rho K_a^dag``.

    Trace preservation is not enforced at construction; use :func:`is_cptp`.
    """

    kraus: tuple[np.ndarray, ...]
    dim_in: int
    dim_out: int

    def __init__(self, kraus: Sequence, dim_in: int | None = None, dim_out: int | None = None):
        ops = tuple(as_matrix(k) for k in kraus)
        if not ops:
            raise ValueError("a channel needs at least one Kraus operator")
        d_out, d_in = ops[0].shape
        if dim_in is not None and dim_in != d_in or dim_out is not None and dim_out != d_out:
            raise DimMismatch("Kraus operator shape disagrees with declared dimensions")
        for k in ops:
            if k.shape != (d_out, d_in):
                raise DimMismatch(f"Kraus operators must all be {d_out}x{d_in}, got {k.shape}")
            k.setflags(write=False)
        object.__setattr__(self, "kraus", ops)
        object.__setattr__(self, "dim_in", d_in)
        object.__setattr__(self, "dim_out", d_out)

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimMismatch(f"input must be {self.dim_in}x{self.dim_in}, got {rho.shape}")
        return sum(k @ rho @ dag(k) for k in self.kraus)

    def adjoint_apply(self, b) -> np.ndarray:
        b = as_matrix(b)
        if b.shape != (self.dim_out, self.dim_out):
            raise DimMismatch(f"input must be {self.dim_out}x{self.dim_out}, got {b.shape}")
        return sum(dag(k) @ b @ k for k in self.kraus)

    def choi(self) -> np.ndarray:
        # vec(K) with input index outer: entry (i, k) = K[k, i]
        vecs = [k.T.reshape(-1) for k in self.kraus]
        return sum(np.outer(v, np.conj(v)) for v in vecs)

    def adjoint(self) -> "KrausChannel":
        """The Hilbert-Schmidt adjoint as a Kraus family (unital iff this is trace preserving)."""
        return KrausChannel([dag(k) for k in self.kraus])

    def __call__(self, rho) -> np.ndarray:
        return self.apply(rho)


@dataclass(frozen=True)
class ChoiMap:
    """A linear map ``M_in -> M_out`` stored as ``C = sum_ij |i><j| (x) E(|i><j|)``."""

    choi_matrix: np.ndarray
    dim_in: int
    dim_out: int

    def __init__(self, choi_matrix, dim_in: int, dim_out: int):
        c = as_matrix(choi_matrix)
        if c.shape != (dim_in * dim_out, dim_in * dim_out):
            raise DimMismatch(f"Choi matrix shape {c.shape} does not match dims ({dim_in}, {dim_out})")
        c = c.copy()
        c.setflags(write=False)
        object.__setattr__(self, "choi_matrix", c)
        object.__setattr__(self, "dim_in", dim_in)
        object.__setattr__(self, "dim_out", dim_out)

    def _blocks(self) -> np.ndarray:
        # blocks[i, k, j, l] = E(|i><j|)[k, l]
        return self.choi_matrix.reshape(self.dim_in, self.dim_out, self.dim_in, self.dim_out)

    def apply(self, rho) -> np.ndarray:
        rho = as_matrix(rho)
        if rho.shape != (self.dim_in, self.dim_in):
            raise DimMismatch(f"input must be {self.dim_in}x{self.dim_in}, got {rho.shape}")
        return np.einsum("ij,ikjl->kl", rho, self._blocks())

    def adjoint_apply(self, b) -> np.ndarray:
        b = as_matrix(b)
        if b.shape != (self.dim_out, self.dim_out):
            raise DimMismatch(f"input must be {self.dim_out}x{self.dim_out}, got {b.shape}")
        return np.einsum("ikjl,kl->ij", np.conj(self._blocks()), b)

    def choi(self) -> np.ndarray:
        return np.array(self.choi_matrix)

    def __call__(self, rho) -> np.ndarray:
        return self.apply(rho)


def apply(ch, rho) -> np.ndarray:
    return ch.apply(rho)


def adjoint_apply(ch, b) -> np.ndarray:
    return ch.adjoint_apply(b)


def choi(ch) -> np.ndarray:
    return ch.choi()


def choi_from_map(fn, dim_in: int) -> np.ndarray:
    """Choi matrix of an arbitrary linear callable, by feeding it every matrix unit."""
    blocks = [[as_matrix(fn(linalg.basis_op(dim_in, i, j))) for j in range(dim_in)] for i in range(dim_in)]
    d_out = blocks[0][0].shape[0]
    c = np.zeros((dim_in * d_out, dim_in * d_out), dtype=complex)
    for i in range(dim_in):
        for j in range(dim_in):
            c[i * d_out:(i + 1) * d_out, j * d_out:(j + 1) * d_out] = blocks[i][j]
    return c


def jamiolkowski(ch) -> np.ndarray:
    """``J = sum_ij |i><j| (x) E(|j><i|)``, the partial transpose of the Choi matrix on the input."""
    return linalg.partial_transpose(ch.choi(), (ch.dim_in, ch.dim_out), which=0)


def same_map(a, b, tol: float = 1e-9) -> bool:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        return False
    return choi_distance(a, b) <= tol


def choi_distance(a, b) -> float:
    if (a.dim_in, a.dim_out) != (b.dim_in, b.dim_out):
        raise DimMismatch("maps have different dimensions")
    return linalg.op_norm(a.choi() - b.choi())


def kraus_from_choi(c, dim_in: int, dim_out: int, tol: float | None = None) -> KrausChannel:
    """Kraus operators from the scaled eigenvectors of a PSD Choi matrix.

    Eigenpairs with ``mu <= 1e-11 * mu_max`` are dropped, so the number of
    operators equals the numerical rank.
    """
    c = as_matrix(c)
    if c.shape != (dim_in * dim_out, dim_in * dim_out):
        raise DimMismatch(f"Choi matrix shape {c.shape} does not match dims ({dim_in}, {dim_out})")
    tol = linalg.default_tol() if tol is None else tol
    if not linalg.is_hermitian(c, tol):
        raise NotPSD("Choi matrix is not Hermitian")
    dec = linalg.eigh(c, tol=max(tol, 1e-10))
    w, v = dec.eigenvalues, dec.eigenvectors
    top = max(w[0], 0.0)
    if w[-1] < -tol * max(1.0, top):
        raise NotPSD(f"Choi matrix has negative eigenvalue {w[-1]:.3e}")
    ops = []
    for mu, vec in zip(w, v.T):
        if mu <= KRAUS_RANK_REL * top:
            continue
        ops.append((np.sqrt(mu) * vec).reshape(dim_in, dim_out).T)
    if not ops:
        ops.append(np.zeros((dim_out, dim_in), dtype=complex))
    return KrausChannel(ops)


@dataclass(frozen=True)
class CptpReport:
    tp_deviation: float
    min_choi_eig: float
    max_choi_eig: float
    tol: float

    @property
    def is_tp(self) -> bool:
        return self.tp_deviation <= self.tol

    @property
    def is_cp(self) -> bool:
        return self.min_choi_eig >= -self.tol * max(1.0, self.max_choi_eig)

    @property
    def is_cptp(self) -> bool:
        return self.is_tp and self.is_cp


def is_cptp(ch, tol: float | None = None) -> CptpReport:
    """Report trace-preservation deviation ``|E*(1) - 1|`` and the Choi spectrum edge."""
    tol = linalg.default_tol() if tol is None else tol
    unit = ch.adjoint_apply(np.eye(ch.dim_out))
    dev = linalg.op_norm(unit - np.eye(ch.dim_in))
    c = ch.choi()
    w = linalg.eigh(0.5 * (c + dag(c))).eigenvalues
    return CptpReport(dev, float(w[-1]), float(w[0]), tol)


def density_matrix(m, tol: float | None = None) -> np.ndarray:
    """Validate a density matrix (Hermitian, unit trace, PSD) and return it as an array."""
    rho = as_matrix(m)
    tol = linalg.default_tol() if tol is None else tol
    if rho.shape[0] != rho.shape[1]:
        raise DimMismatch("a density matrix must be square")
    if not linalg.is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real:.12g}, expected 1")
    rho = 0.5 * (rho + dag(rho))
    if not linalg.is_psd(rho, tol):
        raise ValueError("density matrix is not positive semidefinite")
    return rho


@dataclass(frozen=True)
class Process:
    """A channel together with the state fed into it."""

    channel: object
    prior: np.ndarray

    def __init__(self, channel, prior, tol: float | None = None):
        rho = density_matrix(prior, tol)
        if rho.shape[0] != channel.dim_in:
            raise DimMismatch(f"prior is {rho.shape[0]}-dimensional, channel expects {channel.dim_in}")
        rho.setflags(write=False)
        object.__setattr__(self, "channel", channel)
        object.__setattr__(self, "prior", rho)

    @property
    def dims(self) -> tuple[int, int]:
        return self.channel.dim_in, self.channel.dim_out

    def prediction(self) -> np.ndarray:
        """E(rho)."""
        out = self.channel.apply(self.prior)
        return 0.5 * (out + dag(out))

    def reverse(self, f) -> "Process":
        """The process ``(f, E(rho))`` run backwards through a candidate ``f``."""
        if (f.dim_in, f.dim_out) != (self.channel.dim_out, self.channel.dim_in):
            raise DimMismatch("reverse map must go from the output system back to the input")
        return Process(f, self.prediction())


# -- constructors -------------------------------------------------------------


def identity_channel(d: int = 2) -> KrausChannel:
    return KrausChannel([np.eye(d)])


def unitary(u, tol: float | None = None) -> KrausChannel:
    u = as_matrix(u)
    tol = linalg.default_tol() if tol is None else tol
    if u.shape[0] != u.shape[1] or linalg.op_norm(dag(u) @ u - np.eye(u.shape[0])) > tol:
        raise NotUnitary("matrix is not unitary")
    return KrausChannel([u])


def amplitude_damping(gamma: float) -> KrausChannel:
    gamma = _check_param("gamma", gamma)
    e0 = np.array([[1.0, 0.0], [0.0, np.sqrt(1.0 - gamma)]])
    e1 = np.array([[0.0, np.sqrt(gamma)], [0.0, 0.0]])
    return KrausChannel([e0, e1])


def completely_depolarizing(d: int = 2) -> KrausChannel:
    """``rho -> Tr[rho] 1/d``."""
    return KrausChannel([linalg.basis_op(d, i, j) / np.sqrt(d) for i in range(d) for j in range(d)])


def mix(channels: Sequence, weights: Sequence[float], tol: float | None = None) -> KrausChannel:
    """Convex mixture; concatenates the sqrt(weight)-scaled Kraus families."""
    tol = linalg.default_tol() if tol is None else tol
    w = np.asarray(weights, dtype=float)
    if len(channels) == 0 or len(channels) != len(w):
        raise ValueError("need one weight per channel")
    if np.any(w < 0) or abs(w.sum() - 1.0) > tol:
        raise ParamOutOfRange("weights must form a probability vector")
    dims = {(c.dim_in, c.dim_out) for c in channels}
    if len(dims) != 1:
        raise DimMismatch("mixed channels must share dimensions")
    ops = [np.sqrt(p) * k for ch, p in zip(channels, w) if p > 0 for k in ch.kraus]
    return KrausChannel(ops)


def depolarizing(p: float, d: int = 2) -> KrausChannel:
    p = _check_param("p", p)
    return mix([identity_channel(d), completely_depolarizing(d)], [1.0 - p, p])


def dephasing(lam: float) -> KrausChannel:
    """Qubit phase damping: coherences are multiplied by ``sqrt(1 - lam)``."""
    lam = _check_param("lambda", lam)
    return KrausChannel([np.diag([1.0, np.sqrt(1.0 - lam)]), np.diag([0.0, np.sqrt(lam)])])


def bit_flip_conjugate(ch: KrausChannel) -> KrausChannel:
    """``X o ch o X`` for a qubit channel."""
    if (ch.dim_in, ch.dim_out) != (2, 2):
        raise DimMismatch("bit_flip_conjugate needs a qubit channel")
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    return KrausChannel([x @ k @ x for k in ch.kraus])


def compose(second: KrausChannel, first: KrausChannel) -> KrausChannel:
    """``second o first``."""
    if first.dim_out != second.dim_in:
        raise DimMismatch("cannot compose: dimensions do not chain")
    return KrausChannel([b @ a for b in second.kraus for a in first.kraus])


# -- JSON documents -----------------------------------------------------------


def channel_to_json(ch: KrausChannel) -> dict:
    return {
        "dim_in": ch.dim_in,
        "dim_out": ch.dim_out,
        "kraus": [linalg.matrix_to_json(k) for k in ch.kraus],
    }


def channel_from_json(doc) -> KrausChannel:
    """Parse ``{"dim_in", "dim_out", "kraus": [...]}`` or ``{"choi": Matrix}``."""
    if not isinstance(doc, dict):
        raise ValueError("channel document must be an object")
    if "kraus" in doc:
        ops = doc["kraus"]
        if not isinstance(ops, list) or not ops:
            raise ValueError("'kraus' must be a non-empty list of matrices")
        ch = KrausChannel([linalg.matrix_from_json(k) for k in ops])
        if "dim_in" in doc and int(doc["dim_in"]) != ch.dim_in:
            raise ValueError("dim_in disagrees with Kraus operator shape")
        if "dim_out" in doc and int(doc["dim_out"]) != ch.dim_out:
            raise ValueError("dim_out disagrees with Kraus operator shape")
        return ch
    if "choi" in doc:
        c = linalg.matrix_from_json(doc["choi"])
        n = c.shape[0]
        if "dim_in" in doc or "dim_out" in doc:
            d_in = int(doc.get("dim_in", 0)) or n // int(doc["dim_out"])
            d_out = int(doc.get("dim_out", 0)) or n // d_in
        else:
            d_in = d_out = int(round(np.sqrt(n)))
        if d_in * d_out != n:
            raise ValueError("Choi matrix size does not factor into dim_in * dim_out")
        return kraus_from_choi(c, d_in, d_out)
    raise ValueError("channel document needs 'kraus' or 'choi'")
