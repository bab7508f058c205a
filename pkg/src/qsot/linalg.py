"""Dense complex linear algebra for small square matrices.

Matrices are plain ``numpy`` complex arrays. The Hermitian eigensolver is a
cyclic complex Jacobi iteration: the matrices handled here are at most a few
dozen rows, and the method is simple, accurate and deterministic.

Bipartite index convention: for ``tensor(a, b)`` the index of ``a`` is the
slow (outer) one, so entry ``((i, k), (j, l))`` equals ``a[i, j] * b[k, l]``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimMismatch, NoConvergence, NotHermitian, NotPSD

DEFAULT_TOL = 1e-9

MAX_SWEEPS = 100
OFFDIAG_REL = 1e-13
CLUSTER_GAP_REL = 1e-9


def default_tol() -> float:
    """Global numerical tolerance; the ``QSOT_TOL`` environment variable overrides it."""
    value = os.environ.get("QSOT_TOL")
    if value is None:
        return DEFAULT_TOL
    try:
        tol = float(value)
    except ValueError:
        tol = float("nan")
    if not np.isfinite(tol) or tol <= 0:
        raise ValueError(f"QSOT_TOL must be a positive finite number, got {value!r}")
    return tol


def as_matrix(m) -> np.ndarray:
    """Convert to a finite 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise DimMismatch(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")


def dag(m: np.ndarray) -> np.ndarray:
    return np.conj(np.transpose(m))


def hermiticity_error(m: np.ndarray) -> float:
    return float(np.linalg.norm(m - dag(m)))


def is_hermitian(m, tol: float | None = None) -> bool:
    a = as_matrix(m)
    if a.shape[0] != a.shape[1]:
        return False
    tol = default_tol() if tol is None else tol
    return hermiticity_error(a) <= tol * (1.0 + np.linalg.norm(a))


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues in descending order and matching orthonormal eigenvectors.

    ``eigenvectors[:, k]`` belongs to ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ dag(v)

    def __iter__(self):
        yield self.eigenvalues
        yield self.eigenvectors


def _jacobi_rotation(app: float, aqq: float, apq: complex) -> np.ndarray:
    """2x2 unitary G with G^dag [[app, apq], [conj(apq), aqq]] G diagonal."""
    r = abs(apq)
    phase = apq / r
    theta = (aqq - app) / (2.0 * r)
    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0 else 1.0
    c = 1.0 / np.sqrt(t * t + 1.0)
    s = t * c
    # phase on column q makes the pivot real, then a real rotation zeroes it
    return np.array([[c, s], [-s * np.conj(phase), c * np.conj(phase)]], dtype=complex)


def _orthonormalize(cols: np.ndarray) -> np.ndarray:
    out = np.array(cols, dtype=complex)
    for k in range(out.shape[1]):
        v = out[:, k]
        for j in range(k):
            v = v - np.vdot(out[:, j], v) * out[:, j]
        out[:, k] = v / np.linalg.norm(v)
    return out


def _fix_phase(v: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real and positive."""
    k = int(np.argmax(np.abs(v) > np.abs(v).max() * (1 - 1e-12)))
    z = v[k]
    return v * (abs(z) / z)


def eigh(m, tol: float | None = None) -> SpectralDecomposition:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Raises
    ------
    NotHermitian
        If ``m`` deviates from its adjoint by more than ``1e-10 * (1 + |m|)``.
    NoConvergence
        If the off-diagonal mass is still above threshold after ``MAX_SWEEPS``.
    """
    a = as_matrix(m)
    _require_square(a)
    herm_tol = 1e-10 if tol is None else tol
    scale = np.linalg.norm(a)
    if hermiticity_error(a) > herm_tol * (1.0 + scale):
        raise NotHermitian("matrix is not Hermitian")
    a = 0.5 * (a + dag(a))
    n = a.shape[0]
    v = np.eye(n, dtype=complex)
    threshold = OFFDIAG_REL * scale

    for _ in range(MAX_SWEEPS):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                g = _jacobi_rotation(a[p, p].real, a[q, q].real, apq)
                idx = [p, q]
                a[:, idx] = a[:, idx] @ g
                a[idx, :] = dag(g) @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                v[:, idx] = v[:, idx] @ g
    else:
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off > threshold:
            raise NoConvergence(f"Jacobi did not converge in {MAX_SWEEPS} sweeps (off={off:.3e})")

    w = np.diag(a).real.copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]

    # re-orthonormalize inside clusters of (near) equal eigenvalues
    gap = CLUSTER_GAP_REL * max(np.abs(w).max(initial=0.0), 0.0)
    start = 0
    for k in range(1, n + 1):
        if k == n or w[k - 1] - w[k] > gap:
            if k - start > 1:
                v[:, start:k] = _orthonormalize(v[:, start:k])
            start = k
    for k in range(n):
        v[:, k] = _fix_phase(v[:, k])
    return SpectralDecomposition(w, v)


def eigvalsh(m) -> np.ndarray:
    return eigh(m).eigenvalues


def tensor(a, b) -> np.ndarray:
    """Kronecker product with ``a`` as the outer factor."""
    return np.kron(as_matrix(a), as_matrix(b))


def anticommutator(a, b) -> np.ndarray:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape != b.shape or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"anticommutator needs equal square shapes, got {a.shape} and {b.shape}")
    return a @ b + b @ a


def op_norm(m) -> float:
    """Largest singular value."""
    a = as_matrix(m)
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _psd_spectrum(m) -> tuple[np.ndarray, np.ndarray, float]:
    dec = eigh(m)
    norm = float(np.abs(dec.eigenvalues).max(initial=0.0))
    w = dec.eigenvalues
    if w.size and w[-1] < -1e-10 * norm:
        raise NotPSD(f"matrix has negative eigenvalue {w[-1]:.3e}")
    return np.clip(w, 0.0, None), dec.eigenvectors, norm


def msqrt(m) -> np.ndarray:
    """PSD square root; eigenvalues down to ``-1e-10 |m|`` are clamped to zero."""
    w, v, _ = _psd_spectrum(m)
    return (v * np.sqrt(w)) @ dag(v)


def pinv_sqrt(m) -> np.ndarray:
    """Pseudo-inverse square root; eigenvalues below ``1e-12 |m|`` map to zero."""
    w, v, norm = _psd_spectrum(m)
    inv = np.zeros_like(w)
    keep = w > 1e-12 * norm
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ dag(v)


def min_eigenvalue(m) -> float:
    w = eigvalsh(m)
    return float(w[-1])


def is_psd(m, tol: float | None = None) -> bool:
    """True iff ``lambda_min >= -tol * max(1, lambda_max)``."""
    tol = default_tol() if tol is None else tol
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise NotHermitian("is_psd needs a Hermitian matrix")
    w = eigh(a, tol=max(tol, 1e-10)).eigenvalues
    return bool(w[-1] >= -tol * max(1.0, w[0]))


def partial_trace(m, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite matrix; ``keep`` is 0 (first) or 1 (second)."""
    da, db = dims
    a = as_matrix(m)
    if a.shape != (da * db, da * db):
        raise DimMismatch(f"matrix shape {a.shape} does not match dims {dims}")
    t = a.reshape(da, db, da, db)
    if keep == 0:
        return np.einsum("ikjk->ij", t)
    if keep == 1:
        return np.einsum("kikj->ij", t)
    raise ValueError("keep must be 0 or 1")


def partial_transpose(m, dims: tuple[int, int], which: int = 0) -> np.ndarray:
    da, db = dims
    a = as_matrix(m)
    if a.shape != (da * db, da * db):
        raise DimMismatch(f"matrix shape {a.shape} does not match dims {dims}")
    t = a.reshape(da, db, da, db)
    t = t.transpose(2, 1, 0, 3) if which == 0 else t.transpose(0, 3, 2, 1)
    return t.reshape(da * db, da * db)


def swap_factors(m, dims: tuple[int, int]) -> np.ndarray:
    """Reorder a matrix on X (x) Y into one on Y (x) X; ``dims = (dim X, dim Y)``."""
    dx, dy = dims
    a = as_matrix(m)
    if a.shape != (dx * dy, dx * dy):
        raise DimMismatch(f"matrix shape {a.shape} does not match dims {dims}")
    return a.reshape(dx, dy, dx, dy).transpose(1, 0, 3, 2).reshape(dx * dy, dx * dy)


def basis_op(d: int, i: int, j: int) -> np.ndarray:
    """Matrix unit |i><j| in dimension d."""
    e = np.zeros((d, d), dtype=complex)
    e[i, j] = 1.0
    return e


# JSON encoding: {"rows": n, "cols": m, "data": [[re, im], ...]} in row-major order.


def matrix_to_json(m) -> dict:
    a = as_matrix(m)
    data = [[float(z.real) + 0.0, float(z.imag) + 0.0] for z in a.reshape(-1)]
    return {"rows": a.shape[0], "cols": a.shape[1], "data": data}


def matrix_from_json(doc) -> np.ndarray:
    if not isinstance(doc, dict):
        raise ValueError("matrix document must be an object")
    try:
        rows = int(doc["rows"])
        cols = int(doc["cols"])
        data = doc["data"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"matrix document missing field: {exc}") from None
    if rows <= 0 or cols <= 0:
        raise ValueError("matrix dimensions must be positive")
    if not isinstance(data, list) or len(data) != rows * cols:
        raise ValueError(f"matrix data must hold {rows * cols} entries")
    vals = []
    for entry in data:
        if not (isinstance(entry, list) and len(entry) == 2):
            raise ValueError("complex entries are encoded as [re, im]")
        vals.append(complex(float(entry[0]), float(entry[1])))
    return as_matrix(np.array(vals, dtype=complex).reshape(rows, cols))
