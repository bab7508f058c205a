"""Hermitian observables, spectral projectors and light-touch bases."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .errors import BadIndex, NotHermitian
from .linalg import SpectralDecomposition, as_matrix, dag

GAP_REL = 1e-9

_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
PAULI_LABELS = ("I", "X", "Y", "Z")


@dataclass(frozen=True, eq=False)
class Observable:
    mat: np.ndarray
    spec: SpectralDecomposition = field(repr=False, compare=False)

    def __init__(self, mat, tol: float | None = None):
        m = as_matrix(mat)
        tol = linalg.default_tol() if tol is None else tol
        if not linalg.is_hermitian(m, tol):
            raise NotHermitian("an observable must be Hermitian")
        m = 0.5 * (m + dag(m))
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        object.__setattr__(self, "spec", linalg.eigh(m, tol=max(tol, 1e-10)))

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    def __eq__(self, other) -> bool:
        return isinstance(other, Observable) and np.array_equal(self.mat, other.mat)

    __hash__ = None

    def __mul__(self, scalar: float) -> "Observable":
        return Observable(float(scalar) * self.mat)

    __rmul__ = __mul__


def as_observable(o) -> Observable:
    return o if isinstance(o, Observable) else Observable(o)


def _clusters(o: Observable) -> list[tuple[float, list[int]]]:
    w = o.spec.eigenvalues
    gap = GAP_REL * float(np.abs(w).max(initial=0.0))
    groups: list[list[int]] = []
    for k in range(len(w)):
        if groups and w[groups[-1][-1]] - w[k] <= gap:
            groups[-1].append(k)
        else:
            groups.append([k])
    return [(float(np.mean(w[g])), g) for g in groups]


def spectral_projectors(o) -> list[tuple[float, np.ndarray]]:
    """Distinct eigenvalues (descending) with their orthogonal projectors."""
    o = as_observable(o)
    v = o.spec.eigenvectors
    out = []
    for lam, idx in _clusters(o):
        vs = v[:, idx]
        out.append((lam, vs @ dag(vs)))
    return out


def distinct_eigenvalues(o) -> list[float]:
    return [lam for lam, _ in _clusters(as_observable(o))]


def is_light_touch(o) -> bool:
    """Distinct eigenvalues are ``{lam}`` or ``{lam, -lam}``."""
    o = as_observable(o)
    lams = distinct_eigenvalues(o)
    if len(lams) == 1:
        return True
    if len(lams) != 2:
        return False
    norm = float(np.abs(o.spec.eigenvalues).max())
    return abs(lams[0] + lams[1]) <= GAP_REL * norm


def is_dichotomic(o) -> bool:
    o = as_observable(o)
    lams = distinct_eigenvalues(o)
    return len(lams) == 2 and abs(lams[0] - 1.0) <= GAP_REL and abs(lams[1] + 1.0) <= GAP_REL


def pauli(alpha: int) -> Observable:
    """sigma_0..sigma_3 = I, X, Y, Z."""
    if alpha not in (0, 1, 2, 3):
        raise BadIndex(f"Pauli index must be 0..3, got {alpha!r}")
    return Observable(_PAULI[alpha])


def pauli_matrix(alpha: int) -> np.ndarray:
    if alpha not in (0, 1, 2, 3):
        raise BadIndex(f"Pauli index must be 0..3, got {alpha!r}")
    return _PAULI[alpha].copy()


def pauli_from_label(label: str) -> Observable:
    try:
        return pauli(PAULI_LABELS.index(label.strip().upper()))
    except ValueError:
        raise BadIndex(f"unknown Pauli label {label!r}") from None


@dataclass(frozen=True)
class LightTouchBasis:
    elements: tuple[Observable, ...]

    @property
    def dim(self) -> int:
        return self.elements[0].dim

    def gram(self) -> np.ndarray:
        mats = [e.mat for e in self.elements]
        return np.array([[np.trace(a @ b).real for b in mats] for a in mats])

    def coefficients(self, h) -> np.ndarray:
        """Real expansion coefficients of a Hermitian matrix in this basis."""
        h = as_matrix(h)
        rhs = np.array([np.trace(e.mat @ h).real for e in self.elements])
        return np.linalg.solve(self.gram(), rhs)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)


def light_touch_basis(d: int) -> LightTouchBasis:
    """``d**2`` light-touch observables spanning the Hermitian d x d matrices.

    The identity plus ``2|v><v| - 1`` for ``v`` in: ``(e_i + e_j)/sqrt2`` and
    ``(e_i + 1j e_j)/sqrt2`` for ``i < j``, then ``e_i`` for ``i < d - 1``.
    The last diagonal projector is left out because it is the identity minus
    the others. For ``d = 2`` this is exactly (I, X, Y, Z).
    """
    if d < 2:
        raise ValueError("light_touch_basis needs d >= 2")
    eye = np.eye(d, dtype=complex)
    vecs = []
    for i in range(d):
        for j in range(i + 1, d):
            vecs.append((eye[i] + eye[j]) / np.sqrt(2))
            vecs.append((eye[i] + 1j * eye[j]) / np.sqrt(2))
    vecs.extend(eye[i] for i in range(d - 1))
    elements = [Observable(eye)] + [Observable(2 * np.outer(v, np.conj(v)) - eye) for v in vecs]
    basis = LightTouchBasis(tuple(elements))
    det = np.linalg.det(basis.gram())
    if abs(det) <= 1e-9:
        raise RuntimeError(f"light-touch basis construction degenerate (Gram det {det:.3e})")
    return basis


def bloch_state(r) -> np.ndarray:
    """``(1 + r . sigma) / 2`` for a Bloch vector ``r``."""
    r1, r2, r3 = (float(x) for x in r)
    return 0.5 * (_PAULI[0] + r1 * _PAULI[1] + r2 * _PAULI[2] + r3 * _PAULI[3])


def bloch_vector(rho) -> np.ndarray:
    rho = as_matrix(rho)
    return np.array([np.trace(rho @ _PAULI[k]).real for k in (1, 2, 3)])


def observable_to_json(o) -> dict:
    return {"matrix": linalg.matrix_to_json(as_observable(o).mat)}


def observable_from_json(doc) -> Observable:
    if isinstance(doc, str):
        return pauli_from_label(doc)
    if not isinstance(doc, dict) or "matrix" not in doc:
        raise ValueError("observable document needs a 'matrix' field")
    return Observable(linalg.matrix_from_json(doc["matrix"]))
