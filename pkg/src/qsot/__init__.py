"""Quantum states over time, two-time expectation values and Bayesian inverses of channels."""

from .bayes import (
    BayesReport,
    NoInverse,
    bayes_candidate_eigen,
    bayes_candidate_sylvester,
    bayesian_inverse,
    operational_symmetry_check,
    petz,
    verify_bayes,
)
from .channel import (
    ChoiMap,
    KrausChannel,
    Process,
    amplitude_damping,
    choi,
    choi_distance,
    is_cptp,
    jamiolkowski,
    kraus_from_choi,
)
from .errors import (
    BadIndex,
    DimMismatch,
    NoConvergence,
    NotHermitian,
    NotInvertible,
    NotLightTouch,
    NotPSD,
    NotUnitary,
    ParamOutOfRange,
    QsotError,
    RankDeficientPrediction,
)
from .linalg import SpectralDecomposition, anticommutator, eigh, is_psd, tensor
from .observable import LightTouchBasis, Observable, light_touch_basis, pauli
from .spacetime import StateOverTime, star, star_ls, swap, ttev, ttev_fast, ttev_table

__version__ = "0.1.0"

__all__ = [
    "BadIndex",
    "BayesReport",
    "ChoiMap",
    "DimMismatch",
    "KrausChannel",
    "LightTouchBasis",
    "NoConvergence",
    "NoInverse",
    "NotHermitian",
    "NotInvertible",
    "NotLightTouch",
    "NotPSD",
    "NotUnitary",
    "Observable",
    "ParamOutOfRange",
    "Process",
    "QsotError",
    "RankDeficientPrediction",
    "SpectralDecomposition",
    "StateOverTime",
    "amplitude_damping",
    "anticommutator",
    "bayes_candidate_eigen",
    "bayes_candidate_sylvester",
    "bayesian_inverse",
    "choi",
    "choi_distance",
    "eigh",
    "is_cptp",
    "is_psd",
    "jamiolkowski",
    "kraus_from_choi",
    "light_touch_basis",
    "operational_symmetry_check",
    "pauli",
    "petz",
    "star",
    "star_ls",
    "swap",
    "tensor",
    "ttev",
    "ttev_fast",
    "ttev_table",
    "verify_bayes",
]
