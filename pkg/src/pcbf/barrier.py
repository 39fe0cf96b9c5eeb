"""Polytopic barrier functions, auxiliary barrier chains, and the predictive
constraint assembly used by the safety filter.

A polytopic barrier h(x) = A_cbf x + b_cbf >= 0 encodes one half-space
constraint per row; the safe set is the intersection. Keeping every component
of h decaying no faster than a factor gamma per step,

    h(x_next) >= gamma * h(x_now),        gamma in (0, 1),

keeps h nonnegative forever once it starts nonnegative. Two routes to that
condition live here:

* the auxiliary-chain route for a single affine constraint of relative degree
  rho > 1, which builds rho affine functions whose joint nonnegativity is
  forward invariant when the top-level (input-dependent) one is enforced; and
* the predictive route, which imposes the one-step decay on the lifted
  dynamics so a single linear inequality in the input covers all rows at once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .lifting import LiftedModel, LtiModel, relative_degree
from .linalg import ShapeError, as_matrix
from .qls import (
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    QlsProblem,
    QlsSolution,
    solve_qls,
)

# Closed-set membership slack: h >= -MEMBERSHIP_TOL counts as inside.
MEMBERSHIP_TOL = 1e-9

GAMMA_MESSAGE = "gamma must lie strictly in (0,1)"

# Filter dispositions recorded in traces.
FILTER_INACTIVE = "inactive"
FILTER_PROJECTING = "projecting"
FILTER_INFEASIBLE = "infeasible-passthrough"


def _check_gamma(gamma: float) -> float:
    gamma = float(gamma)
    if not 0.0 < gamma < 1.0:
        raise ValueError(GAMMA_MESSAGE)
    return gamma


@dataclass(frozen=True)
class PolytopicBarrier:
    """h(x) = a_cbf x + b_cbf with safe set {x : h(x) >= 0}."""

    a_cbf: np.ndarray
    b_cbf: np.ndarray

    def __post_init__(self):
        a = as_matrix(self.a_cbf, "barrier rows")
        b = as_matrix(self.b_cbf, "barrier offsets")
        if b.shape[1] != 1:
            raise ShapeError(f"barrier offsets must be a column, got shape {b.shape}")
        if a.shape[0] != b.shape[0]:
            raise ShapeError(
                f"barrier has {a.shape[0]} rows but {b.shape[0]} offsets"
            )
        if np.any(np.all(a == 0.0, axis=1)):
            raise ValueError("barrier rows must not be all zero")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a_cbf", a)
        object.__setattr__(self, "b_cbf", b)

    @property
    def n_constraints(self) -> int:
        return self.a_cbf.shape[0]

    @property
    def state_dim(self) -> int:
        return self.a_cbf.shape[1]

    @classmethod
    def from_box(cls, bounds: Sequence[Tuple[float, float]]) -> "PolytopicBarrier":
        """Interval bounds per state, two rows each: x_i - lo >= 0, hi - x_i >= 0."""
        n = len(bounds)
        rows = []
        offsets = []
        for i, (lo, hi) in enumerate(bounds):
            if not lo < hi:
                raise ValueError(f"box bounds for state {i} must satisfy lo < hi, got ({lo}, {hi})")
            lower = np.zeros(n)
            lower[i] = 1.0
            upper = np.zeros(n)
            upper[i] = -1.0
            rows.extend([lower, upper])
            offsets.extend([-lo, hi])
        return cls(np.vstack(rows), np.array(offsets).reshape(-1, 1))


def eval_barrier(barrier: PolytopicBarrier, x) -> np.ndarray:
    """Barrier value h(x) as a column, one entry per constraint row."""
    x = as_matrix(x, "state")
    if x.shape != (barrier.state_dim, 1):
        raise ShapeError(
            f"state must have shape ({barrier.state_dim}, 1), got {x.shape}"
        )
    return barrier.a_cbf @ x + barrier.b_cbf


def in_safe_set(barrier: PolytopicBarrier, x) -> bool:
    """True iff every barrier component is nonnegative (closed set, small slack)."""
    return bool(np.all(eval_barrier(barrier, x) >= -MEMBERSHIP_TOL))


def one_step_condition(h_next, h_now, gamma: float) -> bool:
    """Componentwise decay check h_next >= gamma * h_now (with solver-scale slack)."""
    gamma = _check_gamma(gamma)
    h_next = np.asarray(h_next, dtype=float).reshape(-1)
    h_now = np.asarray(h_now, dtype=float).reshape(-1)
    if h_next.shape != h_now.shape:
        raise ShapeError(
            f"barrier value lengths differ: {h_next.shape[0]} vs {h_now.shape[0]}"
        )
    return bool(np.all(h_next >= gamma * h_now - MEMBERSHIP_TOL))


@dataclass(frozen=True)
class AffineBarrierChain:
    """Auxiliary functions psi_0..psi_{rho-1} for one affine constraint row.

    Each term is an affine pair (c_j, d_j) with psi_j(x) = c_j x + d_j; the
    recursion psi_j(x) = psi_{j-1}(A x) + (lambda_j - 1) psi_{j-1}(x) stays
    input-free below the relative degree, which is what makes the closed
    affine form valid.
    """

    terms: tuple
    lambdas: tuple
    rho: int

    def __post_init__(self):
        if self.rho < 1 or len(self.terms) != self.rho:
            raise ValueError(
                f"chain needs exactly rho={self.rho} terms, got {len(self.terms)}"
            )
        if len(self.lambdas) != self.rho:
            raise ValueError(
                f"chain needs one decay parameter per level ({self.rho}), got {len(self.lambdas)}"
            )
        for lam in self.lambdas:
            if not 0.0 < lam < 1.0:
                raise ValueError(f"decay parameters must lie strictly in (0,1), got {lam}")

    @property
    def state_dim(self) -> int:
        return self.terms[0][0].shape[1]

    def psi_values(self, x) -> np.ndarray:
        """psi_j(x) for j = 0..rho-1."""
        x = as_matrix(x, "state")
        return np.array([float(c @ x) + d for c, d in self.terms])


def build_affine_chain(
    c0, d0: float, model: LtiModel, lam, rho: int
) -> AffineBarrierChain:
    """Build the auxiliary chain for the affine constraint c0 x + d0 >= 0.

    `lam` is a decay parameter in (0,1), or one per level. The stated relative
    degree `rho` is verified against the model's Markov parameters; a mismatch
    means the chain would gain or lose input dependence at the wrong level,
    so it is rejected.
    """
    c0 = as_matrix(c0, "constraint row")
    if c0.shape[0] != 1:
        raise ShapeError(f"constraint row must be 1 x n, got shape {c0.shape}")
    if int(rho) != rho or rho < 1:
        raise ValueError(f"relative degree must be a positive integer, got {rho!r}")
    rho = int(rho)
    lambdas = tuple(float(v) for v in lam) if np.ndim(lam) else (float(lam),) * rho
    if len(lambdas) != rho:
        raise ValueError(f"need one decay parameter per level ({rho}), got {len(lambdas)}")
    measured = relative_degree(model, c0, max_search=rho)
    if measured != rho:
        raise ValueError(
            f"stated relative degree {rho} is inconsistent with the model "
            f"(measured {measured if measured is not None else f'> {rho}'})"
        )
    terms = [(c0, float(d0))]
    for level in range(1, rho):
        c_prev, d_prev = terms[-1]
        lam_level = lambdas[level - 1]
        terms.append((c_prev @ model.a + (lam_level - 1.0) * c_prev, lam_level * d_prev))
    return AffineBarrierChain(tuple(terms), lambdas, rho)


def chain_constraint_row(
    chain: AffineBarrierChain, model: LtiModel
) -> Tuple[np.ndarray, np.ndarray, float]:
    """Coefficients of the input-dependent top level.

    Returns (row, affine_state, affine_const) with
    psi_rho(x, u) = row u + affine_state x + affine_const; enforcing
    psi_rho >= 0 is the safety-filter inequality for this constraint.
    """
    if chain.state_dim != model.n:
        raise ShapeError(
            f"chain is built for state dimension {chain.state_dim}, model has {model.n}"
        )
    c_top, d_top = chain.terms[-1]
    lam_top = chain.lambdas[-1]
    row = c_top @ model.b
    affine_state = c_top @ model.a + (lam_top - 1.0) * c_top
    return row, affine_state, lam_top * d_top


def chain_membership(
    chains: Sequence[AffineBarrierChain], model: LtiModel, x
) -> bool:
    """True iff every level of every chain is nonnegative at x.

    Only the input-free levels j = 0..rho-1 are tested; the top level is a
    constraint on the input, not a state-set membership.
    """
    x = as_matrix(x, "state")
    if x.shape != (model.n, 1):
        raise ShapeError(f"state must have shape ({model.n}, 1), got {x.shape}")
    for chain in chains:
        if chain.state_dim != model.n:
            raise ShapeError(
                f"chain is built for state dimension {chain.state_dim}, model has {model.n}"
            )
        if not np.all(chain.psi_values(x) >= -MEMBERSHIP_TOL):
            return False
    return True


@dataclass(frozen=True)
class PcbfFilter:
    """Predictive safety filter data for one barrier on one lifted model.

    Precomputes the input map and the state-dependent bound of the decay
    condition on the lifted dynamics:

        a_s v >= b_s_state x + b_s_const

    with a_s = A_cbf B_lift, b_s_state = A_cbf (gamma I - A_lift), and
    b_s_const = -(1 - gamma) b_cbf.
    """

    lifted: LiftedModel
    barrier: PolytopicBarrier
    gamma: float
    a_s: np.ndarray = field(init=False, repr=False)
    b_s_state: np.ndarray = field(init=False, repr=False)
    b_s_const: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        gamma = _check_gamma(self.gamma)
        if self.barrier.state_dim != self.lifted.base.n:
            raise ShapeError(
                f"barrier acts on dimension {self.barrier.state_dim} but the model "
                f"state dimension is {self.lifted.base.n}"
            )
        n = self.lifted.base.n
        a_s = self.barrier.a_cbf @ self.lifted.b_lift
        b_s_state = self.barrier.a_cbf @ (gamma * np.eye(n) - self.lifted.a_lift)
        b_s_const = -(1.0 - gamma) * self.barrier.b_cbf
        for name, arr in (("a_s", a_s), ("b_s_state", b_s_state), ("b_s_const", b_s_const)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "gamma", gamma)


def assemble_pcbf(filt: PcbfFilter, x) -> Tuple[np.ndarray, np.ndarray]:
    """Constraint pair (G, lo) at the current state: admissible inputs satisfy
    G v >= lo."""
    x = as_matrix(x, "state")
    if x.shape != (filt.barrier.state_dim, 1):
        raise ShapeError(
            f"state must have shape ({filt.barrier.state_dim}, 1), got {x.shape}"
        )
    return filt.a_s, filt.b_s_state @ x + filt.b_s_const


def apply_filter(
    filt: Optional[PcbfFilter], u_requested, x, max_iter: int = 100
) -> Tuple[np.ndarray, str, Optional[QlsSolution]]:
    """Project a requested input onto the admissible set at state x.

    Returns (applied input, disposition, solver solution). A disabled filter
    (None) or an untouched input reports "inactive"; an empty admissible set
    passes the request through and reports "infeasible-passthrough".
    """
    u_requested = as_matrix(u_requested, "requested input")
    if filt is None:
        return u_requested, FILTER_INACTIVE, None
    g_mat, lo = assemble_pcbf(filt, x)
    solution = solve_qls(QlsProblem(u_requested, g_mat, lo), max_iter=max_iter)
    if solution.status == STATUS_INFEASIBLE:
        return u_requested, FILTER_INFEASIBLE, solution
    if solution.status != STATUS_OPTIMAL:
        raise RuntimeError(
            f"safety-filter projection did not converge within {max_iter} iterations"
        )
    status = FILTER_PROJECTING if solution.active_set else FILTER_INACTIVE
    return solution.nu, status, solution
