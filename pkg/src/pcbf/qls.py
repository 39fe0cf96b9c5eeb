"""Active-set solver for inequality-constrained linear least squares.

The problem is

    minimize   || nu - target ||_2
    subject to G nu >= g

whose Hessian is the identity, so the optimum is the Euclidean projection of
`target` onto the constraint polyhedron. The solver is a primal active-set
method: starting from a feasible point it repeatedly projects the target onto
the affine set of the working constraints, steps toward that projection until
a blocking constraint is hit, and drops working constraints whose Lagrange
multiplier goes negative. Termination at a point where all multipliers are
nonnegative certifies the KKT conditions.

A Phase-1 search (minimize the worst violation; an LP solved with HiGHS) runs
only when the target itself is infeasible, and doubles as the infeasibility
certificate: if the minimal achievable violation exceeds the constraint
tolerance, the polyhedron is empty.

Determinism: blocking-constraint ties break toward the lowest constraint
index, the most negative multiplier is dropped first (ties again toward the
lowest index), and degenerate working sets shed their most recently added row.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from .linalg import ShapeError, SingularMatrixError, as_matrix, solve

# All constraints must hold to within this absolute slack.
CONSTRAINT_TOL = 1e-8
_STEP_TOL = 1e-12
_MULTIPLIER_TOL = 1e-10

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True)
class QlsProblem:
    """Projection target and constraint polyhedron {nu : g_mat nu >= g_vec}."""

    target: np.ndarray
    g_mat: np.ndarray
    g_vec: np.ndarray

    def __post_init__(self):
        target = as_matrix(self.target, "target")
        g_mat = as_matrix(self.g_mat, "constraint matrix")
        g_vec = as_matrix(self.g_vec, "constraint offsets")
        if target.shape[1] != 1:
            raise ShapeError(f"target must be a column, got shape {target.shape}")
        if g_vec.shape[1] != 1:
            raise ShapeError(f"constraint offsets must be a column, got shape {g_vec.shape}")
        if g_mat.shape[0] != g_vec.shape[0]:
            raise ShapeError(
                f"constraint matrix has {g_mat.shape[0]} rows but offsets have {g_vec.shape[0]}"
            )
        if g_mat.shape[1] != target.shape[0]:
            raise ShapeError(
                f"constraint matrix has {g_mat.shape[1]} columns but the target has "
                f"{target.shape[0]} entries"
            )
        for arr, name in ((target, "target"), (g_mat, "g_mat"), (g_vec, "g_vec")):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim(self) -> int:
        return self.target.shape[0]

    @property
    def n_constraints(self) -> int:
        return self.g_mat.shape[0]


@dataclass
class QlsSolution:
    nu: np.ndarray
    active_set: list
    iterations: int
    status: str


@dataclass(frozen=True)
class KktReport:
    """Residuals of the four optimality conditions (all ~0 at a true optimum)."""

    stationarity: float
    primal_feasibility: float
    complementarity: float
    multiplier_sign: float
    multipliers: np.ndarray = field(repr=False)

    def max_residual(self) -> float:
        return max(
            self.stationarity,
            self.primal_feasibility,
            self.complementarity,
            self.multiplier_sign,
        )


def _phase1(g_mat: np.ndarray, g_vec: np.ndarray) -> tuple[float, np.ndarray]:
    """Minimize the worst constraint violation s >= 0 over (nu, s).

    Returns (minimal violation, minimizing nu). A minimal violation above the
    constraint tolerance certifies that the polyhedron is empty.
    """
    p, m = g_mat.shape
    cost = np.zeros(m + 1)
    cost[-1] = 1.0
    a_ub = np.hstack([-g_mat, -np.ones((p, 1))])
    bounds = [(None, None)] * m + [(0.0, None)]
    result = linprog(cost, A_ub=a_ub, b_ub=-g_vec, bounds=bounds, method="highs")
    if not result.success:  # the LP is always feasible and bounded below by s >= 0
        raise RuntimeError(f"phase-1 feasibility search failed: {result.message}")
    return float(result.x[-1]), result.x[:m].copy()


def solve_qls(
    problem: QlsProblem,
    max_iter: int = 100,
    warm_start: Optional[Sequence[int]] = None,
) -> QlsSolution:
    """Project the target onto the constraint polyhedron.

    `warm_start` optionally seeds the working set with constraint indices from
    a previous solve; it is ignored whenever the implied point is infeasible.
    Returns a solution with status "optimal", "infeasible", or
    "iteration_limit".
    """
    if int(max_iter) != max_iter or max_iter < 1:
        raise ValueError(f"iteration limit must be a positive integer, got {max_iter!r}")
    target = problem.target[:, 0]
    g_mat = problem.g_mat
    g_vec = problem.g_vec[:, 0]
    n_rows = problem.n_constraints

    def eqp(working: list) -> tuple[np.ndarray, np.ndarray]:
        """Projection of the target onto {nu : G_W nu = g_W} and its multipliers."""
        if not working:
            return target.copy(), np.empty(0)
        rows = g_mat[working]
        gram = rows @ rows.T
        rhs = (g_vec[working] - rows @ target).reshape(-1, 1)
        mult = solve(gram, rhs)[:, 0]
        return target + rows.T @ mult, mult

    point = None
    working: list = []
    if warm_start is not None:
        seed = [int(i) for i in dict.fromkeys(warm_start) if 0 <= int(i) < n_rows]
        if seed:
            try:
                candidate, _ = eqp(seed)
            except SingularMatrixError:
                candidate = None
            if candidate is not None and np.all(
                g_mat @ candidate - g_vec >= -CONSTRAINT_TOL
            ):
                point = candidate
                working = list(seed)
    if point is None:
        if np.all(g_mat @ target - g_vec >= -CONSTRAINT_TOL):
            point = target.copy()
        else:
            violation, start = _phase1(g_mat, g_vec)
            if violation > CONSTRAINT_TOL:
                return QlsSolution(start.reshape(-1, 1), [], 0, STATUS_INFEASIBLE)
            point = start
        working = []

    iterations = 0
    while iterations < max_iter:
        iterations += 1
        try:
            goal, mult = eqp(working)
        except SingularMatrixError:
            working.pop()  # shed the most recently added dependent row
            continue
        step = goal - point
        if float(np.abs(step).max() if step.size else 0.0) <= _STEP_TOL:
            if mult.size == 0 or float(mult.min()) >= -_MULTIPLIER_TOL:
                return QlsSolution(goal.reshape(-1, 1), sorted(working), iterations, STATUS_OPTIMAL)
            drop = min(range(len(working)), key=lambda i: (mult[i], working[i]))
            working.pop(drop)
            continue
        # Ratio test: largest alpha in [0, 1] keeping every non-working row feasible.
        alpha = 1.0
        blocker = -1
        for i in range(n_rows):
            if i in working:
                continue
            slope = float(g_mat[i] @ step)
            if slope >= -_STEP_TOL:
                continue
            ratio = max(float(g_vec[i] - g_mat[i] @ point) / slope, 0.0)
            if ratio < alpha - 1e-15:  # ascending scan, so ties keep the lowest index
                alpha = ratio
                blocker = i
        point = point + alpha * step
        if blocker >= 0 and alpha < 1.0:
            working.append(blocker)
    return QlsSolution(point.reshape(-1, 1), sorted(working), iterations, STATUS_ITERATION_LIMIT)


def check_kkt(problem: QlsProblem, solution: QlsSolution) -> KktReport:
    """Residuals of stationarity, primal feasibility, complementarity, and
    multiplier sign at a claimed optimum.

    Multipliers are recovered by least squares over the reported active set,
    so the check stays independent of the solver's internal bookkeeping.
    """
    if solution.status != STATUS_OPTIMAL:
        raise ValueError(f"KKT check requires an optimal solution, got status {solution.status!r}")
    nu = as_matrix(solution.nu, "solution")[:, 0]
    target = problem.target[:, 0]
    g_mat = problem.g_mat
    g_vec = problem.g_vec[:, 0]
    residuals = g_mat @ nu - g_vec
    primal = max(0.0, float((-residuals).max()))
    multipliers = np.zeros(problem.n_constraints)
    active = [int(i) for i in solution.active_set]
    if active:
        rows = g_mat[active]
        mult, *_ = np.linalg.lstsq(rows.T, nu - target, rcond=None)
        multipliers[active] = mult
        gradient = nu - target - rows.T @ mult
    else:
        gradient = nu - target
    stationarity = float(np.abs(gradient).max())
    complementarity = float(np.abs(multipliers * residuals).max()) if active else 0.0
    sign = max(0.0, -float(multipliers.min())) if active else 0.0
    return KktReport(stationarity, primal, complementarity, sign, multipliers)
