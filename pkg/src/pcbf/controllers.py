"""Discrete-time LQR with integrator state and anti-windup, plus Riccati gain
synthesis.

The tracking controller augments the error derivative with an integrated
output error and feeds the result through a static gain; the integrator input
is corrected by eta_aw * (u_applied - integrator) so that when a downstream
safety filter clips the command, the integrator follows the clipped value
instead of winding up. The applied input must be reported back each step via
`set_applied_input`, because the controller itself cannot know what the
filter did.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .linalg import ShapeError, as_matrix, column, solve


class ConvergenceError(RuntimeError):
    """An iterative computation hit its iteration limit."""


@dataclass
class LqrIntController:
    """Stateful tracking controller; one instance per closed loop.

    k_lqr: gain row over [error derivative; integrated selected error]
    c_int: row selecting which error component feeds the integrator
    """

    k_lqr: np.ndarray
    c_int: np.ndarray
    ts: float
    eta_aw: float = 0.2
    e_prev: np.ndarray = field(default=None, repr=False)
    u_prev: float = 0.0
    e_int_prev: float = 0.0

    def __post_init__(self):
        k = as_matrix(self.k_lqr, "gain")
        c = as_matrix(self.c_int, "integrator selection")
        if k.shape[0] != 1 or c.shape[0] != 1:
            raise ShapeError("gain and integrator selection must be single rows")
        if k.shape[1] != c.shape[1] + 1:
            raise ShapeError(
                f"gain must have one more column than the error dimension "
                f"({c.shape[1]}), got {k.shape[1]}"
            )
        if not self.ts > 0:
            raise ValueError(f"sample time must be positive, got {self.ts!r}")
        if self.eta_aw < 0:
            raise ValueError(f"anti-windup gain must be nonnegative, got {self.eta_aw!r}")
        self.k_lqr = k
        self.c_int = c
        if self.e_prev is None:
            self.e_prev = np.zeros((c.shape[1], 1))
        else:
            self.e_prev = column(self.e_prev, "previous error")

    @property
    def error_dim(self) -> int:
        return self.c_int.shape[1]

    def step(self, e) -> float:
        """One controller update; returns the nominal input.

        Advances the stored error and integrator state. The caller must report
        the input actually applied to the plant (after any filtering) through
        `set_applied_input` before the next step.
        """
        e = column(e, "error")
        if e.shape[0] != self.error_dim:
            raise ShapeError(
                f"error must have {self.error_dim} entries, got {e.shape[0]}"
            )
        e_dt = (e - self.e_prev) / self.ts
        e_aug = np.vstack([e_dt, self.c_int @ e])
        u_lqr = float(self.k_lqr @ e_aug)
        u_int = u_lqr + self.eta_aw * (self.u_prev - self.e_int_prev)
        e_int = self.e_int_prev + self.ts * u_int
        self.e_prev = e
        self.e_int_prev = e_int
        return e_int

    def set_applied_input(self, u: float) -> None:
        """Record the post-filter input; feeds the next step's anti-windup term."""
        self.u_prev = float(u)

    def reset(self) -> None:
        self.e_prev = np.zeros((self.error_dim, 1))
        self.u_prev = 0.0
        self.e_int_prev = 0.0


def solve_dare(a, b, q, r, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """Fixed point of the discrete Riccati recursion

        P <- Q + A'PA - A'PB (R + B'PB)^-1 B'PA

    starting from P = Q, declared converged when successive iterates differ by
    less than `tol` in max-norm.
    """
    a = as_matrix(a, "state matrix")
    b = as_matrix(b, "input matrix")
    q = as_matrix(q, "state weight")
    r = as_matrix(r, "input weight")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"state matrix must be square, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeError("input matrix rows must match the state dimension")
    if q.shape != a.shape:
        raise ShapeError("state weight must match the state matrix shape")
    if r.shape != (b.shape[1], b.shape[1]):
        raise ShapeError("input weight must be square with the input dimension")
    p_cur = q.copy()
    for _ in range(int(max_iter)):
        btpb = r + b.T @ p_cur @ b
        try:
            np.linalg.cholesky(btpb)
        except np.linalg.LinAlgError:
            raise ValueError("R + B'PB is not positive definite") from None
        gain = solve(btpb, b.T @ p_cur @ a)
        p_next = q + a.T @ p_cur @ (a - b @ gain)
        p_next = 0.5 * (p_next + p_next.T)
        if float(np.abs(p_next - p_cur).max()) < tol:
            return p_next
        p_cur = p_next
    raise ConvergenceError(f"Riccati recursion did not converge in {max_iter} iterations")


def dare_gain(a, b, q, r, tol: float = 1e-12, max_iter: int = 10_000) -> np.ndarray:
    """State-feedback gain K = (R + B'PB)^-1 B'PA from the Riccati fixed point."""
    a = as_matrix(a, "state matrix")
    b = as_matrix(b, "input matrix")
    p = solve_dare(a, b, q, r, tol=tol, max_iter=max_iter)
    return solve(as_matrix(r, "input weight") + b.T @ p @ b, b.T @ p @ a)
