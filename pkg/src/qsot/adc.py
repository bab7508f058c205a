"""The amplitude-damping example: closed-form inverse, tables, robustness region, Bloch images.

The prior is always the diagonal qubit state ``rho(r3) = diag(1 + r3, 1 - r3) / 2``
and its image under ADC(gamma) has Bloch z-component ``s3 = r3 + gamma (1 - r3)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bayes import bayes_candidate_eigen, candidate_is_cp, choi_min_eig, petz
from .channel import (
    KrausChannel,
    Process,
    amplitude_damping,
    bit_flip_conjugate,
    compose,
    completely_depolarizing,
    dephasing,
    mix,
    _check_param,
)
from .errors import DimMismatch, NotInvertible, ParamOutOfRange
from .observable import bloch_state, bloch_vector, pauli
from .spacetime import pauli_expectations, star_ls, ttev_table

BOUNDARY_BAND = 1e-6


@dataclass(frozen=True)
class AdcParams:
    gamma: float
    r3: float
    epsilon: float = 0.0

    def __post_init__(self):
        _check_param("gamma", self.gamma)
        _check_param("epsilon", self.epsilon)
        _check_r3(self.r3)


def _check_r3(r3: float) -> float:
    r3 = float(r3)
    if not -1.0 < r3 < 1.0:
        raise ParamOutOfRange(f"r3 must lie in (-1, 1), got {r3}")
    return r3


def adc_channel(gamma: float) -> KrausChannel:
    return amplitude_damping(gamma)


def prior(r3: float) -> np.ndarray:
    return bloch_state([0.0, 0.0, _check_r3(r3)])


def adc_process(r3: float, gamma: float) -> Process:
    return Process(adc_channel(gamma), prior(r3))


def s3(r3: float, gamma: float) -> float:
    return r3 + gamma * (1.0 - r3)


def cp_condition(r3: float, gamma: float) -> bool:
    """``r3 >= gamma / (gamma - 2)``, written as ``r3 + s3 >= 0`` to avoid the division."""
    return r3 + s3(r3, gamma) >= 0.0


def kappa_lambda(r3: float, gamma: float) -> tuple[float, float]:
    """Parameters of the inverse written as dephasing(lambda) after X ADC(kappa) X."""
    s = s3(r3, gamma)
    return gamma * (1.0 - r3) / (1.0 + s), gamma * (r3 + s) / (1.0 + r3)


def adc_inverse_closed_form(r3: float, gamma: float) -> KrausChannel:
    """Bayesian inverse of ``(ADC(gamma), rho(r3))`` from its three Kraus operators.

    Raises
    ------
    NotInvertible
        If ``r3 < gamma / (gamma - 2)``.
    """
    r3 = _check_r3(r3)
    gamma = _check_param("gamma", gamma)
    if not cp_condition(r3, gamma):
        raise NotInvertible(
            f"r3 = {r3} < gamma/(gamma-2) = {gamma / (gamma - 2):.12g}: the inverse is not completely positive"
        )
    s = s3(r3, gamma)
    # max() guards against -0.0 rounding right on the boundary
    f0 = np.diag([np.sqrt((1 + r3) / (1 + s)), np.sqrt((1 - gamma) * (1 + s) / (1 + r3))])
    f1 = np.array([[0.0, 0.0], [np.sqrt(gamma * (1 - r3) / (1 + s)), 0.0]])
    f2 = np.diag([0.0, np.sqrt(max(gamma * (r3 + s) / (1 + r3), 0.0))])
    return KrausChannel([f0, f1, f2])


def inverse_from_kappa_lambda(kappa: float, lam: float) -> KrausChannel:
    return compose(dephasing(lam), bit_flip_conjugate(amplitude_damping(kappa)))


@dataclass(frozen=True)
class AdcTables:
    """Pauli tables; rows index the first measurement, columns the second.

    ``ls_petz`` holds ``Tr[(R *_LS E(rho)) (sigma_b (x) sigma_a)]`` at ``[b][a]``.
    ``bayes`` is None when the inverse is not completely positive.
    """

    forward: np.ndarray
    bayes: np.ndarray | None
    petz: np.ndarray
    ls_forward: np.ndarray
    ls_petz: np.ndarray


def tables(r3: float, gamma: float, require_bayes: bool = False) -> AdcTables:
    """All tables for the amplitude-damping example.

    With ``require_bayes`` a missing Bayes table raises NotInvertible.
    """
    proc = adc_process(r3, gamma)
    forward = ttev_table(proc)
    bayes_tab = None
    if cp_condition(r3, gamma):
        bayes_tab = ttev_table(proc.reverse(adc_inverse_closed_form(r3, gamma)))
    elif require_bayes:
        adc_inverse_closed_form(r3, gamma)
    r = petz(proc)
    rev = proc.reverse(r)
    return AdcTables(
        forward=forward,
        bayes=bayes_tab,
        petz=ttev_table(rev),
        ls_forward=pauli_expectations(star_ls(proc)),
        ls_petz=pauli_expectations(star_ls(rev)),
    )


def forward_table_closed_form(r3: float, gamma: float) -> np.ndarray:
    t = np.zeros((4, 4))
    t[0, 0] = 1.0
    t[0, 3] = s3(r3, gamma)
    t[1, 1] = t[2, 2] = np.sqrt(1.0 - gamma)
    t[3, 0] = r3
    t[3, 3] = 1.0 - gamma * (1.0 - r3)
    return t


# -- depolarizing admixture and the robustness region ------------------------


def noisy_adc(gamma: float, epsilon: float) -> KrausChannel:
    """``(1 - epsilon) ADC(gamma) + epsilon * (completely depolarizing)``."""
    gamma = _check_param("gamma", gamma)
    epsilon = _check_param("epsilon", epsilon)
    return mix([amplitude_damping(gamma), completely_depolarizing(2)], [1.0 - epsilon, epsilon])


def robustness_margin(epsilon: float, gamma: float, r3: float) -> float:
    """Left side minus right side of the robustness inequality."""
    s = s3(r3, gamma)
    den = 1 - (1 - epsilon) ** 2 * s**2
    if den <= 0.0:
        # pure prediction: no inverse exists
        return -np.inf
    lhs = (1 - epsilon / 2) * ((1 - epsilon) * (1 - gamma) + epsilon / 2) * (1 - r3**2) / den
    rhs = (1 - epsilon) ** 2 * (1 - gamma)
    return lhs - rhs


def robustness_indicator(epsilon: float, gamma: float, r3: float) -> bool:
    """True iff the inverse of the noisy process is completely positive (strict inequality)."""
    return robustness_margin(epsilon, gamma, r3) > 0.0


def noisy_candidate_is_cp(epsilon: float, gamma: float, r3: float, tol: float = 1e-9) -> bool:
    """Direct check: Choi positivity of the generic inverse candidate."""
    proc = Process(noisy_adc(gamma, epsilon), prior(r3))
    return candidate_is_cp(bayes_candidate_eigen(proc), tol)


@dataclass(frozen=True)
class RegionPoint:
    epsilon: float
    gamma: float
    r3: float
    inside: bool
    margin: float


def region_scan(eps_values, gamma_values, r3_values) -> list[RegionPoint]:
    """Closed-form indicator on a grid, in (epsilon, gamma, r3) lexicographic order."""
    out = []
    for e in eps_values:
        for g in gamma_values:
            for r in r3_values:
                m = robustness_margin(e, g, r)
                out.append(RegionPoint(float(e), float(g), float(r), m > 0.0, m))
    return out


def random_traceless_hermitian(rng: np.random.Generator, offdiagonal_only: bool = False) -> np.ndarray:
    """``x X + y Y + z Z`` with ``(x, y, z)`` uniform in the unit ball, so ``|h| <= 1``."""
    v = rng.normal(size=3)
    v *= rng.uniform() ** (1 / 3) / np.linalg.norm(v)
    if offdiagonal_only:
        v[2] = 0.0
    return sum(c * pauli(k).mat for c, k in zip(v, (1, 2, 3)))


@dataclass(frozen=True)
class ProbeReport:
    trials: int
    invertible: int
    worst_min_choi_eig: float

    @property
    def fraction(self) -> float:
        return self.invertible / self.trials if self.trials else 1.0


def robustness_probe(
    epsilon: float,
    gamma: float,
    r3: float,
    delta: float,
    trials: int = 200,
    seed: int = 0,
    offdiagonal_only: bool = False,
    tol: float = 1e-9,
) -> ProbeReport:
    """Fraction of perturbed priors ``rho + delta h`` whose noisy process stays invertible."""
    ch = noisy_adc(gamma, epsilon)
    rho = prior(r3)
    rng = np.random.default_rng(seed)
    ok = 0
    worst = np.inf
    for _ in range(trials):
        h = random_traceless_hermitian(rng, offdiagonal_only)
        cand = bayes_candidate_eigen(Process(ch, rho + delta * h))
        worst = min(worst, choi_min_eig(cand))
        ok += candidate_is_cp(cand, tol)
    return ProbeReport(trials, ok, float(worst))


# -- Bloch-ball images --------------------------------------------------------


def _fibonacci_sphere(n: int) -> np.ndarray:
    k = np.arange(n) + 0.5
    z = 1 - 2 * k / n
    phi = np.pi * (1 + np.sqrt(5.0)) * k
    rad = np.sqrt(1 - z**2)
    return np.stack([rad * np.cos(phi), rad * np.sin(phi), z], axis=1)


def _random_rotation(rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def sample_bloch_ball(n_samples: int, seed: int = 0, shells: int = 4) -> np.ndarray:
    """Quasi-uniform points: half on the sphere, the rest on interior shells.

    The poles are always included first so that fixed points are visible.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    poles = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])[: min(2, n_samples)]
    rest = n_samples - len(poles)
    n_surface = (rest + 1) // 2
    pts = [poles]
    if n_surface:
        pts.append(_fibonacci_sphere(n_surface) @ _random_rotation(rng).T)
    n_inner = rest - n_surface
    if n_inner:
        radii = (np.arange(shells) + 1) / (shells + 1)
        counts = np.full(shells, n_inner // shells)
        counts[: n_inner % shells] += 1
        for rad, cnt in zip(radii, counts):
            if cnt:
                pts.append(rad * (_fibonacci_sphere(int(cnt)) @ _random_rotation(rng).T))
    return np.concatenate(pts)


def bloch_image(ch, n_samples: int = 500, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Pairs (input Bloch vector, output Bloch vector) for a qubit map."""
    if (ch.dim_in, ch.dim_out) != (2, 2):
        raise DimMismatch("bloch_image needs a qubit map")
    out = []
    for r in sample_bloch_ball(n_samples, seed):
        out.append((r, bloch_vector(ch.apply(bloch_state(r)))))
    return out


def bayes_or_petz(r3: float, gamma: float, which: str):
    """The reverse map of the ADC example: 'bayes' (possibly non-CP candidate) or 'petz'."""
    proc = adc_process(r3, gamma)
    if which == "petz":
        return petz(proc)
    if which == "bayes":
        return bayes_candidate_eigen(proc)
    raise ValueError(f"unknown map {which!r}")
