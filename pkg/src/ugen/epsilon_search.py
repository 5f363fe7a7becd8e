"""Smallest measurement strength that makes the matching condition solvable.

For a fixed strength the feasible axes form a thin set (the matching
equations constrain the axis as well as ``zeta``), so a plain grid never
lands on it.  Feasibility at a given strength is therefore decided by a
zero-residual least-squares solve over ``(axis, zeta)`` with ``zeta`` confined
to the unit ball, seeded from the best points of a sphere grid.  The strength
itself is scanned on a coarse grid and bisected between the last infeasible
and first feasible grid values.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy.optimize import least_squares

from .matching import MatchingProblem, min_norm_solve
from .measurement import post_measurement_arrays
from .qstate import TwoQubitState

FEAS_TOL = 1e-11


def sphere_grid(n_polar: int = 16, n_azimuth: int = 32) -> np.ndarray:
    """Unit vectors on a ``n_azimuth x n_polar`` latitude/longitude grid (cell centres)."""
    theta = (np.arange(n_polar) + 0.5) * np.pi / n_polar
    phi = np.arange(n_azimuth) * 2 * np.pi / n_azimuth
    th, ph = np.meshgrid(theta, phi, indexing="ij")
    return np.stack(
        [np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)], axis=-1
    ).reshape(-1, 3)


def _ball(w: np.ndarray) -> np.ndarray:
    # smooth surjection of R^3 onto the closed unit ball: |zeta| = |sin|w||
    r = np.sqrt(w @ w)
    return w * (np.sin(r) / r if r > 1e-8 else 1 - r * r / 6)


def _unball(z: np.ndarray) -> np.ndarray:
    r = min(np.linalg.norm(z), 1.0)
    if r < 1e-15:
        return np.zeros(3)
    return z / np.linalg.norm(z) * np.arcsin(r)


@dataclass
class FeasiblePoint:
    epsilon: float
    axis: np.ndarray
    zeta: np.ndarray
    residual: float


class EpsilonSearch:
    """Minimum-strength search for one ``(U, state)`` pair.

    Parameters
    ----------
    axis_filter : callable, optional
        Maps a raw axis vector to the constrained axis (e.g. projecting out a
        component); used to restrict the search to a sub-family of axes.
    """

    def __init__(
        self,
        U,
        state: TwoQubitState,
        eps_step: float = 0.01,
        n_polar: int = 16,
        n_azimuth: int = 32,
        n_starts: int = 8,
        coarse_starts: int = 3,
        max_nfev: int = 200,
        refine_tol: float = 1e-9,
        axis_filter: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self.problem = U if isinstance(U, MatchingProblem) else MatchingProblem(U)
        self.state = state
        self.eps_step = eps_step
        self.n_starts = n_starts
        self.coarse_starts = coarse_starts
        self.max_nfev = max_nfev
        self.refine_tol = refine_tol
        self.axis_filter = axis_filter
        grid = sphere_grid(n_polar, n_azimuth)
        if axis_filter is not None:
            grid = np.array([axis_filter(g) for g in grid])
            grid = grid[np.linalg.norm(grid, axis=1) > 1e-6]
            grid /= np.linalg.norm(grid, axis=1)[:, None]
        self.grid = grid
        R = self.problem._R[1:]
        self._G0 = R[:, 0, 1:].copy()
        self._Ga = R[:, 1:, 1:].transpose(1, 0, 2).reshape(3, 9).copy()
        self._GT = R[:, 1:, 1:].reshape(3, 9).copy()
        self._a, self._b, self._T = state.a, state.b, state.T

    def _system_single(self, eps, n):
        # same as _system for one axis, unrolled for speed inside least_squares
        a, b, T = self._a, self._b, self._T
        s = np.sqrt(1 - eps * eps)
        na = n @ a
        d = 1 + eps * na
        a2 = (s * a + ((1 - s) * na + eps) * n) / d
        nT = n @ T
        b2 = (b + eps * nT) / d
        T2 = (s * T + np.outer(n, (1 - s) * nT + eps * b)) / d
        A = self._G0 + (a2 @ self._Ga).reshape(3, 3)
        c = self._G0 @ b2 + self._GT @ T2.ravel()
        return A, c

    def _system(self, eps, axes):
        a2, b2, T2, prob = post_measurement_arrays(self.state.a, self.state.b, self.state.T, eps, axes)
        A, c = self.problem.linear_system(a2, b2, T2)
        return A, c, prob

    def _axis(self, m):
        if self.axis_filter is not None:
            m = self.axis_filter(m)
        return m / np.sqrt(m @ m)

    def feasible_at(self, eps: float, n_starts: Optional[int] = None) -> Optional[FeasiblePoint]:
        """A feasible ``(axis, zeta)`` at strength ``eps``, or None if none was found."""
        n_starts = self.n_starts if n_starts is None else n_starts
        A, c, prob = self._system(eps, self.grid)
        zeta, res = min_norm_solve(A, c)
        norms = np.linalg.norm(zeta, axis=1)
        ok = (res <= FEAS_TOL) & (norms <= 1 + 1e-12) & (prob > 1e-12)
        if ok.any():
            i = int(np.argmax(ok))
            return FeasiblePoint(eps, self.grid[i], zeta[i], float(res[i]))
        clipped = zeta / np.maximum(1.0, norms)[:, None]
        score = np.linalg.norm(np.einsum("kij,kj->ki", A, clipped) - c, axis=1)
        score[prob <= 1e-12] = np.inf
        order = np.argsort(score, kind="stable")[:n_starts]

        def resid(x):
            n = self._axis(x[:3])
            Ai, ci = self._system_single(eps, n)
            r = Ai @ _ball(x[3:]) - ci
            # keep |m| near 1 and pad so that Levenberg-Marquardt accepts the shape
            return np.array([r[0], r[1], r[2], np.sqrt(x[:3] @ x[:3]) - 1, 0.0, 0.0])

        for i in order:
            x0 = np.concatenate([self.grid[i], _unball(clipped[i])])
            sol = least_squares(resid, x0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=self.max_nfev)
            r = float(np.linalg.norm(sol.fun[:3]))
            if r <= FEAS_TOL:
                return FeasiblePoint(eps, self._axis(sol.x[:3]), _ball(sol.x[3:]), r)
        return None

    def minimize(self) -> FeasiblePoint:
        """Smallest feasible strength (coarse scan, then bisection)."""
        grid = np.round(np.arange(0.0, 1.0 + self.eps_step / 2, self.eps_step), 12)
        grid[-1] = 1.0
        found = None
        k = 0
        for k, eps in enumerate(grid):
            found = self.feasible_at(float(eps), self.coarse_starts)
            if found is None and (k == len(grid) - 1):
                found = self.feasible_at(float(eps))
            if found is not None:
                break
        if found is None:
            raise RuntimeError("no feasible measurement found, even at eps = 1")
        # the coarse pass uses few starts; confirm the bracket with the full set
        while k > 0:
            pt = self.feasible_at(float(grid[k - 1]))
            if pt is None:
                break
            found, k = pt, k - 1
        if k == 0:
            return found
        lo, hi = float(grid[k - 1]), found
        while hi.epsilon - lo > self.refine_tol:
            mid = 0.5 * (lo + hi.epsilon)
            pt = self.feasible_at(mid)
            if pt is None:
                lo = mid
            else:
                hi = pt
        return hi
