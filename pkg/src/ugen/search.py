"""Randomised campaign over three-parameter nonlocal gates.

Cases are correlated states paired with ``Omega(alpha)``, drawn under sign
constraints that make the matching condition hard to satisfy.  Cases that fail
the condition at baseline are handed to a local-unitary optimiser (first a
rotation about the system Bloch vector, which leaves the system untouched,
then a general rotation maximising fidelity), and any case left below unit
fidelity to a two-term Kraus optimiser.
"""
from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import least_squares, minimize, minimize_scalar
from scipy.spatial.transform import Rotation

from .channel import KrausChannel
from .matching import EnvSolution, MatchingProblem, RESIDUAL_TOL, classify, min_norm_solve
from .qstate import PAULI_PRODUCTS, PAULIS, PSD_TOL, TwoQubitState, bloch_to_density, fidelity_qubit
from .unitary import NonlocalParams, nonlocal_unitary, rotvec_unitary

log = logging.getLogger(__name__)

SUCCESS_TOL = 1e-6
FIDELITY_TOL = 1e-6
_NORM_SLACK = 1e-10


@dataclass(frozen=True)
class CaseRecord:
    id: int
    alpha: NonlocalParams
    state: TwoQubitState
    baseline: EnvSolution
    retained: bool
    U: Optional[np.ndarray] = field(default=None, compare=False)

    def unitary(self) -> np.ndarray:
        return nonlocal_unitary(self.alpha) if self.U is None else self.U

    def to_dict(self) -> dict:
        d = {"id": self.id, "alpha": self.alpha.alpha.tolist(), "state": self.state.to_dict()}
        if self.U is not None:
            d["U"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.U]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CaseRecord":
        U = None
        if "U" in d:
            arr = np.asarray(d["U"], dtype=float)
            U = arr[..., 0] + 1j * arr[..., 1]
        return make_case(int(d["id"]), NonlocalParams(d["alpha"]), TwoQubitState.from_dict(d["state"]), U)


def make_case(case_id: int, alpha: NonlocalParams, state: TwoQubitState, U=None) -> CaseRecord:
    U = None if U is None else np.asarray(U, dtype=complex)
    gate = nonlocal_unitary(alpha) if U is None else U
    base = MatchingProblem(gate).solve(state)
    return CaseRecord(case_id, alpha, state, base, not base.is_valid, U)


@dataclass
class OptimizationResult:
    case_id: int
    operation: str  # "none", "local_unitary" or "two_term_kraus"
    stage: str  # "baseline", "axis_rotation", "general_su2", "kraus" or "unresolved"
    zeta: np.ndarray
    residual: float
    fidelity: float
    resolved: bool
    V: Optional[np.ndarray] = None
    kraus: Optional[KrausChannel] = None

    def to_dict(self) -> dict:
        d = {
            "id": self.case_id,
            "operation": self.operation,
            "stage": self.stage,
            "zeta": [float(z) for z in self.zeta],
            "residual": float(self.residual),
            "fidelity": float(self.fidelity),
            "resolved": bool(self.resolved),
        }
        if self.V is not None:
            d["V"] = [[[float(z.real), float(z.imag)] for z in row] for row in self.V]
        if self.kraus is not None:
            d["channel"] = self.kraus.to_dict()
        return d


# --------------------------------------------------------------------------
# case generation


def case_rng(seed: int, case_id: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(case_id)]))


def draw_case(seed: int, case_id: int, tii: bool = False, batch: int = 32768, max_batches: int = 200) -> CaseRecord:
    """One constrained random case; a pure function of ``(seed, case_id)``.

    ``|t_ij|`` is uniform on [1/4, 1] for ``i != j`` with sign
    ``sgn[cos 2 alpha_i sin 2 alpha_j]``; ``a`` and ``b`` are uniform on
    [-1/2, 1/2]^3 with ``b_k`` signed by ``sgn[sin 2 alpha_i sin 2 alpha_j]``
    over the other two indices.  Diagonal correlations are zero unless
    ``tii``, in which case they are uniform on [-1, 1].

    Candidates that are not positive semidefinite are rejected; only a few
    in 10^5 survive, so candidates are drawn in batches and the first valid
    one in stream order is kept.
    """
    rng = case_rng(seed, case_id)
    for _ in range(max_batches):
        alpha, a, b, T = _draw_batch(rng, batch, tii)
        ok = _psd_mask(a, b, T)
        if ok.any():
            k = int(np.argmax(ok))
            state = TwoQubitState(a[k].copy(), b[k].copy(), T[k].copy())
            return make_case(case_id, NonlocalParams(alpha[k]), state)
    raise RuntimeError(f"no valid state drawn for case {case_id} after {max_batches * batch} candidates")


def _draw_batch(rng: np.random.Generator, n: int, tii: bool):
    alpha = rng.uniform(0, 2 * np.pi, (n, 3))
    s, c = np.sin(2 * alpha), np.cos(2 * alpha)
    T = np.sign(c[:, :, None] * s[:, None, :]) * rng.uniform(0.25, 1.0, (n, 3, 3))
    idx = np.arange(3)
    T[:, idx, idx] = rng.uniform(-1, 1, (n, 3)) if tii else 0.0
    a = rng.uniform(-0.5, 0.5, (n, 3))
    b = np.abs(rng.uniform(-0.5, 0.5, (n, 3)))
    for k in range(3):
        i, j = [x for x in range(3) if x != k]
        b[:, k] *= np.sign(s[:, i] * s[:, j])
    return alpha, a, b, T


def _psd_mask(a, b, T, tol: float = PSD_TOL) -> np.ndarray:
    n = a.shape[0]
    r = np.zeros((n, 4, 4))
    r[:, 0, 0] = 1
    r[:, 1:, 0] = a
    r[:, 0, 1:] = b
    r[:, 1:, 1:] = T
    rho = 0.25 * np.einsum("kmn,mnij->kij", r, PAULI_PRODUCTS)
    d = rho[:, np.arange(4), np.arange(4)].real
    ok = (d >= -tol).all(axis=1)
    # cheap necessary test: 2x2 principal minors
    for i in range(4):
        for j in range(i + 1, 4):
            ok &= d[:, i] * d[:, j] - np.abs(rho[:, i, j]) ** 2 >= -tol
    idx = np.flatnonzero(ok)
    if idx.size:
        lam = np.linalg.eigvalsh(rho[idx])[:, 0]
        ok[idx] = lam >= -tol
    return ok


def generate_cases(n: int, seed: int, tii: bool = False, workers: int = 1) -> list[CaseRecord]:
    if n < 1:
        raise ValueError("n must be at least 1")
    return _pmap(_draw_star, [(seed, i, tii) for i in range(n)], workers)


def _draw_star(args):
    return draw_case(*args)


def check_constraints(case: CaseRecord, tii: bool = False) -> bool:
    """Whether a case obeys the sampling ranges and sign rules."""
    st, al = case.state, case.alpha.alpha
    s, c = np.sin(2 * al), np.cos(2 * al)
    off = ~np.eye(3, dtype=bool)
    mag = np.abs(st.T[off])
    ok = np.all((mag >= 0.25) & (mag <= 1.0))
    ok &= np.all(np.sign(st.T[off]) == np.sign(np.outer(c, s))[off])
    if not tii:
        ok &= np.all(np.diag(st.T) == 0)
    ok &= np.all(np.abs(st.a) <= 0.5) and np.all(np.abs(st.b) <= 0.5)
    for k in range(3):
        i, j = [x for x in range(3) if x != k]
        if st.b[k] != 0:
            ok &= np.sign(st.b[k]) == np.sign(s[i] * s[j])
    ok &= np.all((al >= 0) & (al <= 2 * np.pi))
    return bool(ok)


def cases_to_json(cases: Sequence[CaseRecord]) -> str:
    return json.dumps({"cases": [c.to_dict() for c in cases]}, indent=1)


def cases_from_json(text: str) -> list[CaseRecord]:
    return [CaseRecord.from_dict(d) for d in json.loads(text)["cases"]]


# --------------------------------------------------------------------------
# local unitaries


class _RotatedProblem:
    """Matching data for a case as a function of a system rotation ``O``."""

    def __init__(self, case: CaseRecord):
        self.problem = MatchingProblem(case.unitary())
        self.a, self.b, self.T = case.state.a, case.state.b, case.state.T

        R = self.problem._R[1:]
        self._G0 = R[:, 0, 1:].copy()
        self._Ga = R[:, 1:, 1:].transpose(1, 0, 2).reshape(3, 9).copy()
        self._GT = R[:, 1:, 1:].reshape(3, 9).copy()
        self._c0 = self._G0 @ self.b
        self._aa = float(self.a @ self.a)

    def solve1(self, v):
        """``(zeta, residual, fidelity)`` for one rotation vector.

        Unrolled (scalar Rodrigues formula, Cramer's rule) because the
        optimisers call it tens of thousands of times per case.
        """
        O = _rodrigues(v)
        a2 = O @ self.a
        A = self._G0 + (a2 @ self._Ga).reshape(3, 3)
        c = self._c0 + self._GT @ (O @ self.T).ravel()
        F = 1 - 0.5 * (self._aa - self.a @ a2)
        (a00, a01, a02), (a10, a11, a12), (a20, a21, a22) = A.tolist()
        c1, c2, c3 = c.tolist()
        d0 = a11 * a22 - a12 * a21
        d1 = a10 * a22 - a12 * a20
        d2 = a10 * a21 - a11 * a20
        det = a00 * d0 - a01 * d1 + a02 * d2
        if abs(det) < 1e-10:
            z, r = min_norm_solve(A, c)
            return z, float(r), F
        e0 = c2 * a22 - a12 * c3
        e1 = c2 * a21 - a11 * c3
        e2 = a10 * c3 - c2 * a20
        z = np.array(
            [
                (c1 * d0 - a01 * e0 + a02 * e1) / det,
                (a00 * e0 - c1 * d1 + a02 * e2) / det,
                (-a00 * e1 - a01 * e2 + c1 * d2) / det,
            ]
        )
        return z, 0.0, F

    def solve(self, O):
        # O has shape (..., 3, 3)
        a2 = O @ self.a
        T2 = O @ self.T
        b2 = np.broadcast_to(self.b, a2.shape)
        A, c = self.problem.linear_system(a2, b2, T2)
        return min_norm_solve(A, c)

    def fidelity(self, O):
        a = self.a
        # qubit fidelity between Bloch vectors of equal length
        return 1 - 0.5 * (a @ a - np.einsum("i,...ij,j->...", a, O, a))


def _rodrigues(v) -> np.ndarray:
    x, y, z = v
    th = math.sqrt(x * x + y * y + z * z)
    if th < 1e-12:
        return np.eye(3)
    kx, ky, kz = x / th, y / th, z / th
    s, c = math.sin(th), math.cos(th)
    C = 1 - c
    return np.array(
        [
            [c + kx * kx * C, kx * ky * C - kz * s, kx * kz * C + ky * s],
            [ky * kx * C + kz * s, c + ky * ky * C, ky * kz * C - kx * s],
            [kz * kx * C - ky * s, kz * ky * C + kx * s, c + kz * kz * C],
        ]
    )


def _rotation(v) -> np.ndarray:
    return Rotation.from_rotvec(v).as_matrix()


def _local_result(case, rp, v, stage) -> OptimizationResult:
    O = _rotation(v)
    zeta, res = rp.solve(O)
    V = rotvec_unitary(v)
    rho = bloch_to_density(case.state.a)
    F = fidelity_qubit(rho, V @ rho @ V.conj().T)
    ok = classify(zeta, float(res)).name == "VALID" and res <= SUCCESS_TOL
    return OptimizationResult(case.id, "local_unitary", stage, zeta, float(res), F, bool(ok), V=V)


def _stage_axis(case: CaseRecord, rp: _RotatedProblem, n_grid: int = 720) -> Optional[np.ndarray]:
    na = np.linalg.norm(rp.a)
    if na < 1e-9:
        return None
    axis = rp.a / na
    thetas = np.linspace(0, 2 * np.pi, n_grid, endpoint=False)
    O = _rotation(thetas[:, None] * axis)
    zeta, res = rp.solve(O)
    norms = np.linalg.norm(zeta, axis=1) + np.where(res > RESIDUAL_TOL, np.inf, 0.0)

    def f(t):
        z, r = rp.solve(_rotation(t * axis))
        return float(np.linalg.norm(z)) + (np.inf if r > RESIDUAL_TOL else 0.0)

    # refine the deepest local minima of |zeta(theta)|
    local = np.flatnonzero((norms <= np.roll(norms, 1)) & (norms <= np.roll(norms, -1)))
    local = local[np.argsort(norms[local], kind="stable")][:5]
    d = thetas[1] - thetas[0]
    for k in local:
        if norms[k] <= 1 - 1e-6:
            return thetas[k] * axis
        r = minimize_scalar(f, bounds=(thetas[k] - d, thetas[k] + d), method="bounded", options={"xatol": 1e-12})
        if r.fun <= 1 + _NORM_SLACK:
            return r.x * axis
    return None


def _stage_general(
    case: CaseRecord,
    rp: _RotatedProblem,
    n_screen: int = 4096,
    n_starts: int = 32,
    max_fev: int = 2000,
    penalty: float = 1e3,
    n_polish: int = 4,
) -> Optional[np.ndarray]:
    rng = case_rng(case.id, 0x5EED)
    rv = Rotation.random(n_screen, random_state=rng).as_rotvec()
    rv = np.vstack([np.zeros(3), rv])
    O = _rotation(rv)
    zeta, res = rp.solve(O)
    norms = np.linalg.norm(zeta, axis=1)
    F = rp.fidelity(O)
    hinge = np.maximum(0, norms - 1) ** 2 + res**2
    score = -F + penalty * hinge
    starts = rv[np.argsort(score, kind="stable")[:n_starts]]

    def obj(v):
        z, r, Fv = rp.solve1(v)
        return -Fv + penalty * (max(0.0, np.sqrt(z @ z) - 1) ** 2 + r * r)

    def margin(v):
        z = rp.solve1(v)[0]
        return 1 - float(z @ z)

    def consistent(v):
        return -rp.solve1(v)[1]

    feasible = (norms <= 1) & (res <= RESIDUAL_TOL)
    anchor = rv[np.flatnonzero(feasible)[np.argmax(F[feasible])]] if feasible.any() else None

    # coarse simplex runs from every start, then polish the best distinct endpoints
    ends = []
    for v0 in starts:
        nm = minimize(obj, v0, method="Nelder-Mead", options={"maxfev": max_fev, "xatol": 1e-6, "fatol": 1e-10})
        ends.append((nm.fun, nm.x))
    ends.sort(key=lambda e: e[0])
    picked = []
    for _, x in ends:
        if all(np.linalg.norm(_rotation(x) - _rotation(y)) > 1e-4 for y in picked):
            picked.append(x)
        if len(picked) == n_polish:
            break

    best, best_F = None, -np.inf
    for x in picked:
        pol = minimize(
            lambda v: -rp.solve1(v)[2],
            x,
            method="SLSQP",
            constraints=[{"type": "ineq", "fun": margin}],
            options={"ftol": 1e-15, "maxiter": 200},
        )
        cand = pol.x if margin(pol.x) >= -2 * _NORM_SLACK else x
        cand = _repair(cand, anchor, margin)
        if cand is None or consistent(cand) < -RESIDUAL_TOL:
            continue
        Fc = float(rp.solve1(cand)[2])
        if Fc > best_F + 1e-12:
            best, best_F = cand, Fc
    return best


def _repair(v, anchor, margin) -> Optional[np.ndarray]:
    """Pull ``v`` back into the feasible set along the segment to a feasible ``anchor``."""
    if margin(v) >= -2 * _NORM_SLACK:
        return v
    if anchor is None:
        return None
    lo, hi = 0.0, 1.0  # fraction of the way from anchor to v
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if margin(anchor + mid * (v - anchor)) >= 0:
            lo = mid
        else:
            hi = mid
    return anchor + lo * (v - anchor)


def optimize_local_unitary(case: CaseRecord, tol: float = SUCCESS_TOL, **kw) -> OptimizationResult:
    """Best system unitary for a retained case.

    Stage 1 rotates about the system Bloch vector (fidelity 1); stage 2
    maximises fidelity over all rotations subject to feasibility.  A case
    with no feasible rotation is returned unresolved.
    """
    if not case.retained:
        raise ValueError(f"case {case.id} is feasible at baseline")
    rp = _RotatedProblem(case)
    v = _stage_axis(case, rp)
    if v is not None:
        out = _local_result(case, rp, v, "axis_rotation")
        if out.resolved and out.residual <= tol:
            return out
    v = _stage_general(case, rp, **kw)
    if v is None:
        z, r = case.baseline.zeta, case.baseline.residual_norm
        return OptimizationResult(case.id, "local_unitary", "unresolved", z, r, 1.0, False)
    out = _local_result(case, rp, v, "general_su2")
    out.resolved = out.resolved and out.residual <= tol
    return out


# --------------------------------------------------------------------------
# two-term Kraus channels


def _isometry(x: np.ndarray) -> np.ndarray:
    """4x2 isometry from 16 reals via polar decomposition."""
    X = (x[:8] + 1j * x[8:]).reshape(4, 2)
    u, _, vh = np.linalg.svd(X, full_matrices=False)
    return u @ vh


def channel_affine(ops) -> tuple[np.ndarray, np.ndarray]:
    """``(M, c)`` with ``a' = M a + c`` and ``T' = M T + c b^T`` for Kraus operators ``ops``."""
    M = np.zeros((3, 3))
    c = np.zeros(3)
    for K in ops:
        Kd = K.conj().T
        M += 0.5 * np.einsum("iab,bc,jcd,da->ij", PAULIS, K, PAULIS, Kd).real
        c += 0.5 * np.einsum("iab,bc,ca->i", PAULIS, K, Kd).real
    return M, c


def optimize_two_term_kraus(
    case: CaseRecord, tol: float = SUCCESS_TOL, n_starts: int = 32, max_nfev: int = 2000
) -> OptimizationResult:
    """Two-term channel that fixes the system state and satisfies matching.

    Zero-residual least squares over the dilation isometry (16 reals,
    orthonormalised by polar decomposition) and ``zeta`` in the unit ball.
    The residual stacks the fixed-point condition ``E(rho_S) = rho_S`` with
    the matching mismatch, so a zero residual means unit fidelity.
    """
    if not case.retained:
        raise ValueError(f"case {case.id} is feasible at baseline")
    from .epsilon_search import _ball, _unball

    problem = MatchingProblem(case.unitary())
    a, b, T = case.state.a, case.state.b, case.state.T
    rng = case_rng(case.id, 0xC0FFEE)

    def parts(x):
        Z = _isometry(x[:16])
        M, c = channel_affine((Z[:2], Z[2:]))
        # E(I) = I + c.sigma feeds the environment marginal into the correlations
        return Z, M @ a + c, M @ T + np.outer(c, b)

    def resid(x):
        _, a2, T2 = parts(x)
        A, cc = problem.linear_system(a2, b, T2)
        return np.concatenate([a2 - a, A @ _ball(x[16:]) - cc])

    best = None
    for k in range(n_starts):
        x0 = rng.normal(size=16)
        if k == 0:
            # start near the identity channel
            x0 = np.concatenate([np.eye(4, 2).reshape(-1), np.zeros(8)]) + 0.1 * x0
        a0 = parts(x0)
        A, cc = problem.linear_system(a0[1], b, a0[2])
        z0, _ = min_norm_solve(A, cc)
        z0 = z0 / max(1.0, np.linalg.norm(z0))
        x0 = np.concatenate([x0, _unball(z0)])
        sol = least_squares(resid, x0, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=max_nfev)
        cost = float(np.linalg.norm(sol.fun))
        if best is None or cost < best[0]:
            best = (cost, sol.x)
        if cost <= 1e-12:
            break
    x = best[1]
    Z = _isometry(x[:16])
    ch = KrausChannel((Z[:2], Z[2:]))
    _, a2, T2 = parts(x)
    zeta = _ball(x[16:])
    rho = bloch_to_density(a)
    F = fidelity_qubit(rho, ch(rho))
    A, cc = problem.linear_system(a2, b, T2)
    res = float(np.linalg.norm(A @ zeta - cc))
    ok = res <= tol and F >= 1 - FIDELITY_TOL and np.linalg.norm(zeta) <= 1 + 1e-9
    return OptimizationResult(
        case.id, "two_term_kraus", "kraus" if ok else "unresolved", zeta, res, F, bool(ok), kraus=ch
    )


# --------------------------------------------------------------------------
# sweep


@dataclass
class CaseOutcome:
    case: CaseRecord
    unitary: Optional[OptimizationResult]
    kraus: Optional[OptimizationResult]

    @property
    def final(self) -> OptimizationResult:
        if self.kraus is not None and self.kraus.resolved:
            return self.kraus
        if self.unitary is not None:
            return self.unitary
        base = self.case.baseline
        return OptimizationResult(self.case.id, "none", "baseline", base.zeta, base.residual_norm, 1.0, True)


@dataclass
class SweepReport:
    outcomes: list
    n: int
    seed: int
    tol: float

    @property
    def retained(self) -> list:
        return [o for o in self.outcomes if o.case.retained]

    def summary(self) -> dict:
        ret = self.retained
        uf = [o.unitary.fidelity for o in ret if o.unitary is not None and o.unitary.resolved]
        stages: dict = {}
        for o in ret:
            stages[o.final.stage] = stages.get(o.final.stage, 0) + 1
        return {
            "n": self.n,
            "seed": self.seed,
            "tol": self.tol,
            "retained": len(ret),
            "resolved_unitary": sum(1 for o in ret if o.unitary is not None and o.unitary.resolved),
            "resolved": sum(1 for o in ret if o.final.resolved),
            "kraus_attempted": sum(1 for o in ret if o.kraus is not None),
            "kraus_resolved": sum(1 for o in ret if o.kraus is not None and o.kraus.resolved),
            "unitary_fidelity_min": float(min(uf)) if uf else None,
            "unitary_fidelity_mean": float(np.mean(uf)) if uf else None,
            "stages": dict(sorted(stages.items())),
        }

    def rows(self) -> list[dict]:
        out = []
        for o in self.outcomes:
            r = o.final
            al = o.case.alpha.alpha
            out.append(
                {
                    "id": o.case.id,
                    "alpha1": al[0],
                    "alpha2": al[1],
                    "alpha3": al[2],
                    "retained": int(o.case.retained),
                    "stage": r.stage,
                    "fidelity": r.fidelity,
                    "unitary_fidelity": o.unitary.fidelity if o.unitary is not None else 1.0,
                    "residual": r.residual,
                    "zeta1": r.zeta[0],
                    "zeta2": r.zeta[1],
                    "zeta3": r.zeta[2],
                }
            )
        return out


def process_case(case: CaseRecord, tol: float = SUCCESS_TOL, kraus: bool = True) -> CaseOutcome:
    if not case.retained:
        return CaseOutcome(case, None, None)
    u = optimize_local_unitary(case, tol)
    k = None
    if kraus and (not u.resolved or u.fidelity < 1 - FIDELITY_TOL):
        k = optimize_two_term_kraus(case, tol)
    return CaseOutcome(case, u, k)


def _process_star(args):
    seed, i, tii, tol, kraus = args
    return process_case(draw_case(seed, i, tii), tol, kraus)


def _pmap(fn, items: list, workers: int) -> list:
    if workers <= 1:
        return [fn(x) for x in items]
    from concurrent.futures import ProcessPoolExecutor

    with ProcessPoolExecutor(workers) as ex:
        # map preserves input order, so the reduction is schedule independent
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def sweep(
    n: int, seed: int, tol: float = SUCCESS_TOL, workers: int = 1, tii: bool = False, kraus: bool = True
) -> SweepReport:
    """Generate, filter and optimise ``n`` cases."""
    outcomes = _pmap(_process_star, [(seed, i, tii, tol, kraus) for i in range(n)], workers)
    return SweepReport(outcomes, n, seed, tol)


def sweep_cases(cases: Iterable[CaseRecord], tol: float = SUCCESS_TOL, workers: int = 1, kraus: bool = True) -> SweepReport:
    """Sweep over an imported case list."""
    cases = list(cases)
    outcomes = _pmap(_case_star, [(c, tol, kraus) for c in cases], workers)
    return SweepReport(outcomes, len(cases), -1, tol)


def _case_star(args):
    return process_case(*args)


def validate_result(case: CaseRecord, result: OptimizationResult) -> tuple[float, float]:
    """Independent re-check of a reported result: ``(residual, fidelity)``."""
    rho_s = bloch_to_density(case.state.a)
    if result.operation == "local_unitary":
        V = result.V
        from .qstate import apply_local
        from .unitary import su2_to_so3

        moved = apply_local(case.state, su2_to_so3(V))
        out = V @ rho_s @ V.conj().T
    elif result.operation == "two_term_kraus":
        from .channel import apply_channel_system_side

        moved = apply_channel_system_side(result.kraus, case.state)
        out = result.kraus(rho_s)
    else:
        moved, out = case.state, rho_s
    res = float(np.linalg.norm(MatchingProblem(case.unitary()).residual(moved, result.zeta)))
    return res, fidelity_qubit(rho_s, out)
