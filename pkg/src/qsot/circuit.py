"""Measurement circuits for two-time expectation values, simulated on density matrices.

Qubit 0 is always the system. A Pauli measurement of the system is done
indirectly: rotate the measured axis onto Z, copy it onto a fresh ancilla with
a CNOT, rotate back, and read the ancilla in the Z basis. Channels are
Stinespring blocks whose environment qubits are discarded (traced out).

Qubit order in tensor products: qubit 0 is the outermost factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .adc import cp_condition, prior, s3
from .channel import amplitude_damping, _check_param
from .errors import BadIndex, DimMismatch, NotInvertible

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_P0 = np.diag([1.0, 0.0]).astype(complex)
_P1 = np.diag([0.0, 1.0]).astype(complex)

KINDS = ("H", "X", "Ry", "Rz", "CNOT", "CRy", "Toffoli", "MeasureZ", "Discard")
_N_CONTROLS = {"CNOT": 1, "CRy": 1, "Toffoli": 2}


def ry(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz(delta: float) -> np.ndarray:
    """Phase shift ``diag(1, exp(i delta))``."""
    return np.array([[1, 0], [0, np.exp(1j * delta)]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        if len(self.targets) != 1:
            raise ValueError("every gate acts on exactly one target qubit")
        if set(self.targets) & set(self.controls):
            raise ValueError("targets and controls must be disjoint")
        if len(self.controls) != _N_CONTROLS.get(self.kind, 0):
            raise ValueError(f"{self.kind} takes {_N_CONTROLS.get(self.kind, 0)} control(s)")
        if not np.isfinite(self.angle):
            raise ValueError("gate angle must be finite")

    def matrix(self) -> np.ndarray:
        """Unitary on (controls..., target); undefined for MeasureZ and Discard."""
        base = {
            "H": _H,
            "X": _X,
            "Ry": ry(self.angle),
            "Rz": rz(self.angle),
            "CNOT": _X,
            "CRy": ry(self.angle),
            "Toffoli": _X,
        }[self.kind]
        for _ in self.controls:
            base = np.kron(_P0, np.eye(base.shape[0])) + np.kron(_P1, base)
        return base

    def adjoint(self) -> "Gate":
        if self.kind in ("Ry", "Rz", "CRy"):
            return Gate(self.kind, self.targets, self.controls, -self.angle)
        return self


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    initial: tuple[np.ndarray, ...]
    ops: tuple[Gate, ...]
    records: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if len(self.initial) != self.n_qubits:
            raise DimMismatch("need one initial state per qubit")
        for g in self.ops:
            for q in g.targets + g.controls:
                if not 0 <= q < self.n_qubits:
                    raise BadIndex(f"gate {g.kind} touches qubit {q} outside 0..{self.n_qubits - 1}")

    def depth(self) -> int:
        return len(self.ops)


@dataclass(frozen=True)
class SimResult:
    expectation: float
    shots: int
    stderr: float


# -- simulator ----------------------------------------------------------------


class _State:
    """Unnormalized density matrix as a tensor with one row and one column axis per live qubit."""

    def __init__(self, tensor: np.ndarray, live: list[int]):
        self.t = tensor
        self.live = live

    @classmethod
    def product(cls, mats) -> "_State":
        m = np.ones((1, 1), dtype=complex)
        for a in mats:
            m = np.kron(m, a)
        n = len(mats)
        return cls(m.reshape((2,) * (2 * n)), list(range(n)))

    def copy(self) -> "_State":
        return _State(self.t.copy(), list(self.live))

    def trace(self) -> float:
        k = len(self.live)
        if k == 0:
            return float(self.t.real)
        return float(np.trace(self.t.reshape(2**k, 2**k)).real)

    def conjugate_by(self, op: np.ndarray, qubits) -> None:
        """``rho -> op rho op^dag`` on the given qubits (any operator, not only unitaries)."""
        m = len(qubits)
        k = len(self.live)
        rows = [self.live.index(q) for q in qubits]
        cols = [k + r for r in rows]
        ot = op.reshape((2,) * (2 * m))
        t = np.tensordot(ot, self.t, axes=(list(range(m, 2 * m)), rows))
        t = np.moveaxis(t, list(range(m)), rows)
        t = np.tensordot(t, ot.conj(), axes=(cols, list(range(m, 2 * m))))
        self.t = np.moveaxis(t, list(range(2 * k - m, 2 * k)), cols)

    def discard(self, q: int) -> None:
        k = len(self.live)
        a = self.live.index(q)
        self.t = np.trace(self.t, axis1=a, axis2=k + a)
        self.live.remove(q)

    def matrix(self) -> np.ndarray:
        k = len(self.live)
        return self.t.reshape(2**k, 2**k)


def _apply_unitary(state: _State, g: Gate) -> None:
    state.conjugate_by(g.matrix(), g.controls + g.targets)


def _check_live(state: _State, g: Gate) -> None:
    for q in g.controls + g.targets:
        if q not in state.live:
            raise ValueError(f"gate {g.kind} acts on discarded qubit {q}")


def simulate_exact(c: Circuit) -> SimResult:
    """Expectation of the product of all ``MeasureZ`` records, by weighted branching."""
    branches = [(_State.product(c.initial), 1)]
    for g in c.ops:
        new = []
        for st, sign in branches:
            _check_live(st, g)
            if g.kind == "MeasureZ":
                for proj, s in ((_P0, 1), (_P1, -1)):
                    b = st.copy()
                    b.conjugate_by(proj, g.targets)
                    if b.trace() > 1e-300:
                        new.append((b, sign * s))
            elif g.kind == "Discard":
                st.discard(g.targets[0])
                new.append((st, sign))
            else:
                _apply_unitary(st, g)
                new.append((st, sign))
        branches = new
    value = sum(st.trace() * sign for st, sign in branches)
    return SimResult(float(value), 0, 0.0)


def simulate_shots(c: Circuit, shots: int, seed: int = 0) -> SimResult:
    """Seeded finite-shot estimate.

    Trajectories are grouped: at each measurement the shots reaching it are
    split between the two outcomes with a binomial draw, which has the same
    distribution as sampling every shot on its own.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    rng = np.random.default_rng(seed)
    counts = {1: 0, -1: 0}

    def run(st: _State, start: int, n: int, sign: int) -> None:
        for idx in range(start, len(c.ops)):
            g = c.ops[idx]
            _check_live(st, g)
            if g.kind == "MeasureZ":
                total = st.trace()
                b0 = st.copy()
                b0.conjugate_by(_P0, g.targets)
                p0 = min(max(b0.trace() / total, 0.0), 1.0)
                n0 = int(rng.binomial(n, p0))
                if n0:
                    run(b0, idx + 1, n0, sign)
                if n - n0:
                    st.conjugate_by(_P1, g.targets)
                    run(st, idx + 1, n - n0, -sign)
                return
            if g.kind == "Discard":
                st.discard(g.targets[0])
            else:
                _apply_unitary(st, g)
        counts[sign] += n

    run(_State.product(c.initial), 0, shots, 1)
    mean = (counts[1] - counts[-1]) / shots
    if shots > 1:
        # sample variance of +-1 outcomes
        var = (shots / (shots - 1)) * (1.0 - mean**2)
        stderr = float(np.sqrt(max(var, 0.0) / shots))
    else:
        stderr = 0.0
    return SimResult(float(mean), shots, stderr)


def evolve(c: Circuit, system_input: np.ndarray) -> np.ndarray:
    """Run a measurement-free circuit with qubit 0 replaced by ``system_input``.

    ``system_input`` may be any 2x2 matrix; the result is the matrix on the
    qubits still alive at the end.
    """
    mats = [np.asarray(system_input, dtype=complex)] + list(c.initial[1:])
    st = _State.product(mats)
    for g in c.ops:
        _check_live(st, g)
        if g.kind == "MeasureZ":
            raise ValueError("evolve does not support measurements")
        if g.kind == "Discard":
            st.discard(g.targets[0])
        else:
            _apply_unitary(st, g)
    return st.matrix()


def block_choi(c: Circuit) -> np.ndarray:
    """Choi matrix of a one-qubit-to-one-qubit block, by process tomography on matrix units."""
    c_mat = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            out = evolve(c, e)
            if out.shape != (2, 2):
                raise DimMismatch("block must leave exactly one qubit alive")
            c_mat[2 * i:2 * i + 2, 2 * j:2 * j + 2] = out
    return c_mat


# -- the two circuits ---------------------------------------------------------


def _check_pauli(alpha: int) -> int:
    if alpha not in (0, 1, 2, 3):
        raise BadIndex(f"Pauli index must be 0..3, got {alpha!r}")
    return alpha


def basis_change(alpha: int, qubit: int = 0) -> list[Gate]:
    """Gates ``V`` with ``V^dag Z V = sigma_alpha``, in application order.

    sigma_1: H. sigma_2: phase shift by -pi/2 then H. sigma_3: nothing.
    """
    _check_pauli(alpha)
    if alpha == 1:
        return [Gate("H", (qubit,))]
    if alpha == 2:
        return [Gate("Rz", (qubit,), angle=-np.pi / 2), Gate("H", (qubit,))]
    return []


def measurement_stage(alpha: int, ancilla: int, label: str, system: int = 0) -> list[Gate]:
    """Lueders measurement of ``sigma_alpha`` on the system via an ancilla; empty for alpha = 0."""
    if _check_pauli(alpha) == 0:
        return []
    v = basis_change(alpha, system)
    undo = [g.adjoint() for g in reversed(v)]
    return v + [Gate("CNOT", (ancilla,), (system,))] + undo + [Gate("MeasureZ", (ancilla,), label=label)]


def _angle(cos_half: float) -> float:
    return 2.0 * float(np.arccos(np.clip(cos_half, 0.0, 1.0)))


def theta_angle(gamma: float) -> float:
    """``cos(theta / 2) = sqrt(1 - gamma)``."""
    return _angle(np.sqrt(1.0 - _check_param("gamma", gamma)))


def reverse_angles(r3: float, gamma: float) -> tuple[float, float]:
    """``(vartheta, varphi)`` for the inverse block."""
    s = s3(r3, gamma)
    return (
        _angle(np.sqrt((1 + r3) / (1 + s))),
        _angle(np.sqrt(max((1 - gamma) * (1 + s) / (1 + r3), 0.0))),
    )


def _forward_block_ops(gamma: float, env: int = 1) -> list[Gate]:
    return [
        Gate("CRy", (env,), (0,), theta_angle(gamma)),
        Gate("CNOT", (0,), (env,)),
        Gate("Discard", (env,)),
    ]


def _reverse_block_ops(r3: float, gamma: float, anc1: int = 1, anc2: int = 2) -> list[Gate]:
    vartheta, varphi = reverse_angles(r3, gamma)
    return [
        Gate("X", (0,)),
        Gate("X", (anc1,)),
        Gate("CRy", (anc1,), (0,), vartheta),
        Gate("CRy", (anc2,), (0,), varphi),
        Gate("CNOT", (0,), (anc1,)),
        Gate("Discard", (anc1,)),
        Gate("Discard", (anc2,)),
    ]


def _ket0() -> np.ndarray:
    return _P0.copy()


def forward_noise_block(gamma: float) -> Circuit:
    """Stinespring circuit of ADC(gamma) on qubits (system, environment)."""
    return Circuit(2, (_ket0(), _ket0()), tuple(_forward_block_ops(gamma)))


def reverse_noise_block(r3: float, gamma: float) -> Circuit:
    """Circuit of the inverse channel on qubits (system, ancilla 1, ancilla 2)."""
    if not cp_condition(r3, gamma):
        raise NotInvertible(f"r3 = {r3} < gamma/(gamma-2): no Bayesian inverse channel")
    return Circuit(3, (_ket0(),) * 3, tuple(_reverse_block_ops(r3, gamma)))


def forward_circuit(alpha: int, beta: int, r3: float, gamma: float) -> Circuit:
    """Measure sigma_alpha on rho(r3), apply ADC(gamma), measure sigma_beta.

    Qubits: 0 system, 1 environment, 2 second-measurement ancilla,
    3 first-measurement ancilla.
    """
    _check_pauli(alpha)
    _check_pauli(beta)
    ops = measurement_stage(alpha, 3, "first") + _forward_block_ops(gamma) + measurement_stage(beta, 2, "second")
    records = tuple(lbl for a, lbl in ((alpha, "first"), (beta, "second")) if a)
    return Circuit(4, (prior(r3), _ket0(), _ket0(), _ket0()), tuple(ops), records)


def reverse_circuit(beta: int, alpha: int, r3: float, gamma: float) -> Circuit:
    """Measure sigma_beta on E(rho), apply the Bayesian inverse, measure sigma_alpha.

    Qubits: 0 system, 1 and 2 noise ancillas, 3 second-measurement ancilla,
    4 first-measurement ancilla.
    """
    _check_pauli(alpha)
    _check_pauli(beta)
    if not cp_condition(r3, gamma):
        raise NotInvertible(f"r3 = {r3} < gamma/(gamma-2): no Bayesian inverse channel")
    predicted = amplitude_damping(gamma).apply(prior(r3))
    ops = (
        measurement_stage(beta, 4, "first")
        + _reverse_block_ops(r3, gamma)
        + measurement_stage(alpha, 3, "second")
    )
    records = tuple(lbl for a, lbl in ((beta, "first"), (alpha, "second")) if a)
    return Circuit(5, (predicted,) + (_ket0(),) * 4, tuple(ops), records)
