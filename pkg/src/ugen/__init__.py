"""Product-state generation of subsystem dynamics for qubit pairs."""
from .errors import (
    ConsistencyError,
    DegenerateOutcomeError,
    DomainError,
    FamilyMismatchError,
    InvalidStateError,
    ParameterError,
    UgenError,
)
from .qstate import (
    QubitState,
    TwoQubitState,
    apply_local,
    bell_state,
    decompose,
    fidelity_qubit,
    is_valid,
    partial_trace,
    reconstruct,
    werner_state,
)
from .measurement import WeakMeasurement, apply_closed_form, build_operators
from .unitary import CNOT, SWAP, KAKForm, NonlocalParams, kak_decompose, nonlocal_unitary
from .matching import EnvSolution, Feasibility, MatchingProblem, kraus_from_env, solve_env
from .channel import Dilation, KrausChannel, stinespring_dilate
from .epsilon_search import EpsilonSearch

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError",
    "DegenerateOutcomeError",
    "DomainError",
    "FamilyMismatchError",
    "InvalidStateError",
    "ParameterError",
    "UgenError",
    "QubitState",
    "TwoQubitState",
    "apply_local",
    "bell_state",
    "decompose",
    "fidelity_qubit",
    "is_valid",
    "partial_trace",
    "reconstruct",
    "werner_state",
    "WeakMeasurement",
    "apply_closed_form",
    "build_operators",
    "CNOT",
    "SWAP",
    "KAKForm",
    "NonlocalParams",
    "kak_decompose",
    "nonlocal_unitary",
    "EnvSolution",
    "Feasibility",
    "MatchingProblem",
    "kraus_from_env",
    "solve_env",
    "Dilation",
    "KrausChannel",
    "stinespring_dilate",
    "EpsilonSearch",
]
