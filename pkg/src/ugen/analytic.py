"""Worked examples and constructive solutions of the matching problem.

Every closed form here is cross-checked against the generic linear solver in
:mod:`ugen.matching` before it is returned.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.optimize import minimize_scalar

from .epsilon_search import EpsilonSearch
from .errors import DomainError, FamilyMismatchError
from .matching import (
    EnvSolution,
    MatchingProblem,
    RESIDUAL_TOL,
    classify,
    solve_env,
)
from .measurement import WeakMeasurement, apply_closed_form, measurement_fidelity, post_measurement_arrays
from .qstate import I2, TwoQubitState, apply_local, bell_state, bloch_to_density, fidelity_qubit, werner_state
from .unitary import (
    CNOT,
    SWAP,
    KAKForm,
    NonlocalParams,
    givens,
    inducing_unitary,
    kak_decompose,
    nonlocal_unitary,
    rotation_unitary,
    su2_to_so3,
)

WERNER_KINK = np.sqrt(3) / 2
SWAP_CNOT = SWAP @ CNOT


# --------------------------------------------------------------------------
# Werner states under CNOT


@dataclass(frozen=True)
class WernerSolution:
    lam: float
    epsilon_min: float
    axis: np.ndarray
    zeta: np.ndarray
    fidelity: float

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "epsilon_min": self.epsilon_min,
            "axis": [float(x) for x in self.axis],
            "zeta": [float(x) for x in self.zeta],
            "fidelity": self.fidelity,
        }


def werner_branch1(lam: float) -> float:
    return float(lam)


def werner_branch2(lam: float) -> float:
    """``2 lam sqrt(4 lam^2 - 2) / (4 lam^2 - 1)``, meaningful for ``lam >= sqrt(3)/2``."""
    q = 4 * lam * lam
    return float(2 * lam * np.sqrt(q - 2) / (q - 1))


def werner_axis(lam: float) -> np.ndarray:
    """Optimal measurement axis for the Werner state.

    On the upper branch ``n_x = -1/sqrt(4 lam^2 - 2)`` and ``n_z`` follows from
    normalisation.
    """
    if lam <= WERNER_KINK:
        return np.array([1.0, 0.0, 0.0])
    nx = -1 / np.sqrt(4 * lam * lam - 2)
    return np.array([nx, 0.0, np.sqrt(max(0.0, 1 - nx * nx))])


def werner_epsilon_min(lam: float, tol: float = RESIDUAL_TOL) -> WernerSolution:
    """Closed-form minimum strength for the Werner state ``W(lam)`` under CNOT.

    The returned measurement is verified: the post-selected state must be
    feasible with the reported ``zeta``.
    """
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"lambda must lie in [0, 1], got {lam}")
    eps = werner_branch1(lam) if lam <= WERNER_KINK else werner_branch2(lam)
    axis = werner_axis(lam)
    m = WeakMeasurement(min(eps, 1.0), axis)
    post = apply_closed_form(werner_state(lam), m).post_state
    sol = solve_env(CNOT, post, tol)
    if not sol.is_valid:
        # the closed form sits on the feasibility boundary; allow the rounding slack
        if sol.residual_norm > tol or sol.norm > 1 + 1e-7:
            raise RuntimeError(f"closed-form Werner solution failed verification at lambda={lam}")
    return WernerSolution(float(lam), float(eps), axis, sol.zeta, measurement_fidelity(np.zeros(3), m))


def werner_zeta_x(lam: float, epsilon: float, n_x: float) -> float:
    """Environment component ``zeta_x`` forced by a measurement in the xz-plane."""
    if n_x == 0:
        raise ZeroDivisionError("n_x = 0 makes zeta_x undefined")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    s = np.sqrt(1 - epsilon**2)
    return float(-(s / n_x + (1 - s) * n_x) * lam / epsilon)


def werner_numerical(lam: float, **search_kw) -> WernerSolution:
    """Minimum strength for ``W(lam)`` found by direct search over ``(eps, axis)``."""
    pt = EpsilonSearch(CNOT, werner_state(lam), **search_kw).minimize()
    m = WeakMeasurement.normalized(pt.epsilon, pt.axis)
    return WernerSolution(float(lam), pt.epsilon, m.axis, pt.zeta, measurement_fidelity(np.zeros(3), m))


def werner_fidelity_curve(grid: Sequence[float]) -> list[tuple[float, float]]:
    """``(lam, F)`` at the optimal measurement; the Werner system marginal is maximally mixed."""
    out = []
    for lam in grid:
        sol = werner_epsilon_min(float(lam))
        out.append((float(lam), sol.fidelity))
    return out


# --------------------------------------------------------------------------
# Bell state under CNOT


def bell_cnot_optimum() -> tuple[WeakMeasurement, np.ndarray]:
    """Optimal measurement on the system of ``Phi+`` before a CNOT.

    Returns the measurement ``eps = 2 sqrt(2)/3`` along ``(1, 0, -1)/sqrt(2)``
    and the environment Bloch vector ``(1, 0, 0)``.
    """
    m = WeakMeasurement.normalized(2 * np.sqrt(2) / 3, [1.0, 0.0, -1.0])
    post = apply_closed_form(bell_state("phi+"), m).post_state
    sol = solve_env(CNOT, post)
    if sol.residual_norm > RESIDUAL_TOL or sol.norm > 1 + 1e-9:
        raise RuntimeError("Bell/CNOT optimum failed verification")
    return m, sol.zeta


def _xz_axes(phi):
    phi = np.asarray(phi, dtype=float)
    return np.stack([np.sin(phi), np.zeros_like(phi), np.cos(phi)], axis=-1)


def bell_cnot_xz_scan(n_phi: int = 720, eps_tol: float = 1e-10) -> tuple[float, float]:
    """Smallest feasible strength over axes with ``n_y = 0``.

    On this circle the matching system is always consistent, so feasibility is
    ``|zeta(eps, phi)| <= 1``.  For each strength the smallest ``|zeta|`` over
    ``phi`` comes from a grid and a golden-section refinement; the strength is
    then bisected.  Returns ``(eps_min, phi_opt)``.
    """
    problem = MatchingProblem(CNOT)
    state = bell_state("phi+")
    phis = np.linspace(0, 2 * np.pi, n_phi, endpoint=False)
    dphi = phis[1] - phis[0]

    def zeta_norm(eps, phi):
        a2, b2, T2, _ = post_measurement_arrays(state.a, state.b, state.T, eps, _xz_axes(phi))
        z, res = problem.solve_arrays(a2, b2, T2)
        return np.linalg.norm(z, axis=-1) + np.where(res > RESIDUAL_TOL, np.inf, 0.0)

    def best(eps):
        vals = zeta_norm(eps, phis)
        k = int(np.argmin(vals))
        r = minimize_scalar(
            lambda p: float(zeta_norm(eps, p)),
            bracket=(phis[k] - dphi, phis[k], phis[k] + dphi),
            method="golden",
            tol=1e-12,
        )
        return float(r.fun), float(r.x) % (2 * np.pi)

    lo, hi = 0.5, 1.0
    if best(lo)[0] <= 1:
        raise RuntimeError("unexpected feasibility at the lower bracket")
    while hi - lo > eps_tol:
        mid = 0.5 * (lo + hi)
        if best(mid)[0] <= 1:
            hi = mid
        else:
            lo = mid
    return hi, best(hi)[1]


def bell_cnot_numerical(**search_kw):
    """Unconstrained search over ``(eps, axis)`` for the Bell/CNOT pair."""
    return EpsilonSearch(CNOT, bell_state("phi+"), **search_kw).minimize()


# --------------------------------------------------------------------------
# Bell state under SWAP . CNOT


def swapcnot_zeta(epsilon: float, axis) -> np.ndarray:
    """Environment Bloch vector solving the ``Phi+`` / SWAP.CNOT conditions at strength ``epsilon``.

    ``(eps n_x, n_y (s - 1)/eps, (n_z^2 + (1 - n_z^2) s)/(eps n_z))`` with ``s = sqrt(1 - eps^2)``.
    """
    n = np.asarray(axis, dtype=float)
    if abs(n[2]) < 1e-12:
        raise DomainError("axis-degenerate: n_z = 0 makes zeta_z singular")
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must lie in (0, 1], got {epsilon}")
    s = np.sqrt(1 - epsilon**2)
    nz2 = n[2] ** 2
    return np.array(
        [epsilon * n[0], n[1] * (s - 1) / epsilon, (nz2 + (1 - nz2) * s) / (epsilon * n[2])]
    )


def swapcnot_projective_solution(axis) -> tuple[float, np.ndarray]:
    """A projective measurement is required; ``zeta = (n_x, -n_y, n_z)``."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    zeta = swapcnot_zeta(1.0, n)
    post = apply_closed_form(bell_state("phi+"), WeakMeasurement(1.0, n)).post_state
    res = np.linalg.norm(MatchingProblem(SWAP_CNOT).residual(post, zeta))
    if res > RESIDUAL_TOL:
        raise RuntimeError(f"projective SWAP.CNOT solution has residual {res:.3g}")
    return 1.0, zeta


def ry_rotated_bell(theta: float) -> TwoQubitState:
    """``(R_y(theta) (x) I) Phi+ (R_y(theta) (x) I)^dag``."""
    O = su2_to_so3(rotation_unitary([0, 1, 0], theta))
    return apply_local(bell_state("phi+"), O)


def swapcnot_ry_point(theta: float, **search_kw) -> float:
    return EpsilonSearch(SWAP_CNOT, ry_rotated_bell(theta), **search_kw).minimize().epsilon


def swapcnot_ry_sweep(grid: Sequence[float], workers: int = 1, **search_kw) -> list[tuple[float, float]]:
    """``(theta, eps_min)`` for each rotation angle in ``grid``."""
    grid = [float(t) for t in grid]
    if any(t < -1e-12 or t > np.pi / 2 + 1e-12 for t in grid):
        raise DomainError("theta must lie in [0, pi/2]")
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor
        from functools import partial

        with ProcessPoolExecutor(workers) as ex:
            eps = list(ex.map(partial(swapcnot_ry_point, **search_kw), grid))
    else:
        eps = [swapcnot_ry_point(t, **search_kw) for t in grid]
    return list(zip(grid, eps))


# --------------------------------------------------------------------------
# constructive theorems


@dataclass(frozen=True)
class Theorem1Certificate:
    V: np.ndarray
    zeta: np.ndarray
    residual: float
    fidelity: float
    family: int

    @property
    def is_valid(self) -> bool:
        return self.residual <= RESIDUAL_TOL and np.linalg.norm(self.zeta) <= 1 + 1e-9


def _as_kak(U) -> KAKForm:
    if isinstance(U, KAKForm):
        return U
    if isinstance(U, NonlocalParams):
        return KAKForm(U)
    return kak_decompose(U)


def _rotate_onto_axis(w: np.ndarray, k: int) -> np.ndarray:
    """Product of two Givens rotations taking ``w`` to ``|w| e_k`` (0-based ``k``)."""
    others = [i for i in range(3) if i != k]
    G = np.eye(3)
    v = np.asarray(w, dtype=float).copy()
    for i in others:
        # rotate in the (i, k) plane so that component i vanishes
        theta = np.arctan2(v[i], v[k])
        g = givens((i + 1, k + 1), theta if i < k else -theta)
        v = g @ v
        G = g @ G
    if v[k] < 0:
        # a half-turn about another axis fixes the orientation
        flip = givens((others[0] + 1, k + 1), np.pi)
        G = flip @ G
    return G


def _plane_rotation(k: int, z: float) -> np.ndarray:
    i, j = [x for x in range(3) if x != k]
    return givens((i + 1, j + 1), z)


def theorem1_construct(
    U: Union[NonlocalParams, KAKForm, np.ndarray], state: TwoQubitState, tol: float = RESIDUAL_TOL
) -> Theorem1Certificate:
    """Givens-rotation construction of a system unitary ``V`` and environment ``zeta``.

    Requires at least one nonlocal angle in ``{n pi/2}``.  With exactly one
    such angle ``alpha_k`` (two-parameter family), row ``k`` of the correlation
    matrix is rotated orthogonal to columns ``i`` and ``j``, a final rotation
    about axis ``k`` solves the remaining scalar condition, and
    ``zeta = b_k e_k``.  With two special angles the column of the free index
    is rotated onto its own axis and ``zeta`` keeps the other components of
    ``b``.

    ``U`` may carry right local factors; they are conjugated away and the
    result mapped back, so the certificate refers to the full gate.
    """
    kak = _as_kak(U)
    p = kak.params
    mask = p.special_mask()
    if not mask.any():
        raise FamilyMismatchError("no nonlocal angle is a multiple of pi/2")
    full = MatchingProblem(kak.matrix())
    Or1, Or2 = su2_to_so3(kak.R1), su2_to_so3(kak.R2)

    def certify(V, zeta_reduced):
        zeta = Or2.T @ zeta_reduced
        moved = apply_local(state, su2_to_so3(V))
        res = float(np.linalg.norm(full.residual(moved, zeta)))
        F = fidelity_qubit(bloch_to_density(state.a), bloch_to_density(moved.a))
        return Theorem1Certificate(V, zeta, res, F, p.family)

    # work with the state as seen by Omega: rho' = (R1 (x) R2) rho (...)^dag
    reduced = apply_local(state, Or1, Or2)
    b = reduced.b
    free = np.flatnonzero(~mask)

    if len(free) == 0:
        G = np.eye(3)
        zeta_r = b.copy()
    elif len(free) == 1:
        i = int(free[0])
        G = _rotate_onto_axis(reduced.T[:, i], i) if np.linalg.norm(reduced.T[:, i]) > 1e-14 else np.eye(3)
        zeta_r = b.copy()
        zeta_r[i] = 0.0
    else:
        k = int(np.flatnonzero(mask)[0])
        i, j = [x for x in range(3) if x != k]
        zeta_r = np.zeros(3)
        zeta_r[k] = b[k]
        # trivial case: the conditions may already hold
        if np.linalg.norm(matching_for(p, reduced, zeta_r)) <= tol:
            return certify(I2.copy(), zeta_r)
        w = np.cross(reduced.T[:, i], reduced.T[:, j])
        if np.linalg.norm(w) < 1e-12:
            # columns i, j are parallel: any unit vector orthogonal to both
            span = np.stack([reduced.T[:, i], reduced.T[:, j]])
            _, _, vh = np.linalg.svd(span)
            w = vh[-1]
        G0 = _rotate_onto_axis(w, k)
        rot = apply_local(reduced, G0)

        def f(z):
            r = matching_for(p, apply_local(rot, _plane_rotation(k, z)), zeta_r)
            return r[k]

        A, B = f(0.0), f(np.pi / 2)
        z = np.arctan2(-A, B)
        G = _plane_rotation(k, z) @ G0

    # the rotation acts on the reduced picture: V' = L(G), V = R1^dag V' R1
    Vp = inducing_unitary(G)
    V = kak.R1.conj().T @ Vp @ kak.R1
    cert = certify(V, zeta_r)
    if cert.residual > tol:
        raise RuntimeError(f"Givens construction failed verification (residual {cert.residual:.3g})")
    return cert


def matching_for(p: NonlocalParams, state: TwoQubitState, zeta) -> np.ndarray:
    """Matching mismatch for ``Omega(p)``, ordered by component."""
    return MatchingProblem(nonlocal_unitary(p)).residual(state, zeta)


def theorem2_matrices(p: NonlocalParams, a) -> tuple[np.ndarray, np.ndarray]:
    """``(S, M)`` with ``(S + M) zeta = S b`` for a diagonal correlation matrix.

    ``S = diag(s2 s3, s1 s3, s1 s2)`` with ``s_i = sin 2 alpha_i``.
    """
    a = np.asarray(a, dtype=float)
    s = np.sin(2 * p.alpha)
    c = np.cos(2 * p.alpha)
    S = np.diag([s[1] * s[2], s[0] * s[2], s[0] * s[1]])
    M = np.array(
        [
            [0, a[2] * c[2] * s[1], -a[1] * c[1] * s[2]],
            [-a[2] * c[2] * s[0], 0, a[0] * c[0] * s[2]],
            [a[1] * c[1] * s[0], -a[0] * c[0] * s[1], 0],
        ]
    )
    return S, M


def diagonal_solve(p: NonlocalParams, a, b, Tdiag, tol: float = RESIDUAL_TOL) -> EnvSolution:
    """Environment state for ``Omega(p)`` and a state with diagonal correlations.

    If some ``alpha_i`` is a multiple of pi/2 the solution is ``zeta = b_i e_i``.
    Otherwise ``(I - [a_t]_x) zeta = b`` with ``a_t = (a_i cot 2 alpha_i)``,
    solved in closed form; ``|zeta| <= |b|`` always.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    state = TwoQubitState(a, b, np.diag(np.asarray(Tdiag, dtype=float)))
    mask = p.special_mask()
    if mask.any():
        i = int(np.flatnonzero(mask)[0])
        zeta = np.zeros(3)
        zeta[i] = b[i]
    else:
        at = a / np.tan(2 * p.alpha)
        zeta = (b + (at @ b) * at + np.cross(at, b)) / (1 + at @ at)
    res = float(np.linalg.norm(matching_for(p, state, zeta)))
    return EnvSolution(zeta, res, classify(zeta, res, tol))


def diagonal_zeta_norm2(p: NonlocalParams, a, b) -> float:
    """``(b^2 + (b . a_t)^2) / (1 + a_t^2)``."""
    at = np.asarray(a, dtype=float) / np.tan(2 * p.alpha)
    b = np.asarray(b, dtype=float)
    return float((b @ b + (b @ at) ** 2) / (1 + at @ at))


def _so3_svd(T: np.ndarray):
    P, sv, Qt = np.linalg.svd(T)
    Q = Qt.T
    d = sv.copy()
    if np.linalg.det(P) < 0:
        P[:, 2] *= -1
        d[2] *= -1
    if np.linalg.det(Q) < 0:
        Q[:, 2] *= -1
        d[2] *= -1
    return P, d, Q


def both_qubit_construct(
    U: Union[KAKForm, np.ndarray], state: TwoQubitState, tol: float = RESIDUAL_TOL
) -> tuple[np.ndarray, np.ndarray, EnvSolution]:
    """Local unitaries ``V1, V2`` on both qubits that make the pair solvable.

    ``V1 (x) V2`` undoes the right local factors of ``U`` and rotates the
    correlation matrix to diagonal form (SVD with reflections moved into the
    singular values); the diagonal problem is then solved in closed form.
    The returned ``zeta`` is the environment state of the product experiment
    ``U (V1 rho_S V1^dag (x) zeta) U^dag``.
    """
    kak = _as_kak(U)
    Or2 = su2_to_so3(kak.R2)
    P, d, Q = _so3_svd(state.T)
    # W1 = R1 V1 and W2 = R2 V2 must induce P^T and Q^T
    W1, W2 = inducing_unitary(P.T), inducing_unitary(Q.T)
    V1 = kak.R1.conj().T @ W1
    V2 = kak.R2.conj().T @ W2
    diag_state = apply_local(state, P.T, Q.T)
    sol = diagonal_solve(kak.params, diag_state.a, diag_state.b, np.diag(diag_state.T), tol)
    zeta = Or2.T @ sol.zeta
    moved = apply_local(state, su2_to_so3(V1), su2_to_so3(V2))
    res = float(np.linalg.norm(MatchingProblem(kak.matrix()).residual(moved, zeta)))
    return V1, V2, EnvSolution(zeta, res, classify(zeta, res, tol))
