"""Discrete-time LTI models, horizon lifting, delay augmentation, relative degree.

The lifted pair (A_lift, B_lift) = (A**L, (I + A + ... + A**(L-1)) B) maps the
current state and a constant input to the state L steps ahead. Holding the
input constant over the horizon is what reduces the relative degree of a
constraint, so a one-step barrier condition on the lifted model covers plants
whose true input path (delays, inner loops) is unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .linalg import ShapeError, as_matrix, mat_pow, power_sum

# Markov parameters below this magnitude count as structurally zero.
MARKOV_ZERO_TOL = 1e-9


@dataclass(frozen=True)
class LtiModel:
    """Discrete-time pair x_{k+1} = A x_k + B u_k with sample time `ts` (s)."""

    a: np.ndarray
    b: np.ndarray
    ts: float = 1.0

    def __post_init__(self):
        a = as_matrix(self.a, "state matrix")
        b = as_matrix(self.b, "input matrix")
        if a.shape[0] != a.shape[1]:
            raise ShapeError(f"state matrix must be square, got shape {a.shape}")
        if b.shape[0] != a.shape[0]:
            raise ShapeError(
                f"input matrix rows {b.shape[0]} do not match state dimension {a.shape[0]}"
            )
        if not self.ts > 0:
            raise ValueError(f"sample time must be positive, got {self.ts!r}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[1]

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """One step of the recursion; x is (n, 1), u is (m, 1)."""
        return self.a @ x + self.b @ u


@dataclass(frozen=True)
class LiftedModel:
    """`base` advanced `horizon` steps under a constant input."""

    base: LtiModel
    horizon: int
    a_lift: np.ndarray
    b_lift: np.ndarray

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        a = as_matrix(self.a_lift, "lifted state matrix")
        b = as_matrix(self.b_lift, "lifted input matrix")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "a_lift", a)
        object.__setattr__(self, "b_lift", b)

    def as_model(self) -> LtiModel:
        """The lifted pair viewed as a plain model with step horizon*ts."""
        return LtiModel(self.a_lift, self.b_lift, self.base.ts * self.horizon)

    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return self.a_lift @ x + self.b_lift @ u


def lift(model: LtiModel, horizon: int) -> LiftedModel:
    """Build the constant-input lifted pair over `horizon` steps.

    Horizon 1 reproduces the base matrices.
    """
    if int(horizon) != horizon or horizon < 1:
        raise ValueError(f"horizon must be a positive integer, got {horizon!r}")
    horizon = int(horizon)
    a_lift = mat_pow(model.a, horizon)
    b_lift = power_sum(model.a, horizon) @ model.b
    return LiftedModel(model, horizon, a_lift, b_lift)


def augment_delay(model: LtiModel, delay_steps: int) -> LtiModel:
    """Realize an input delay of `delay_steps` samples as state augmentation.

    The augmented state is [x; u_{k-1}; ...; u_{k-m}] and the plant sees the
    oldest buffered input, so the same constraint machinery applies unchanged.
    Delay 0 returns the model as-is.
    """
    if int(delay_steps) != delay_steps or delay_steps < 0:
        raise ValueError(f"delay must be a nonnegative integer, got {delay_steps!r}")
    delay_steps = int(delay_steps)
    if delay_steps == 0:
        return model
    n, m = model.n, model.m
    dim = n + delay_steps * m
    a_aug = np.zeros((dim, dim))
    b_aug = np.zeros((dim, m))
    a_aug[:n, :n] = model.a
    a_aug[:n, n + (delay_steps - 1) * m : n + delay_steps * m] = model.b
    # Fresh input enters the newest buffer slot; older slots shift down.
    b_aug[n : n + m, :] = np.eye(m)
    for age in range(1, delay_steps):
        rows = slice(n + age * m, n + (age + 1) * m)
        cols = slice(n + (age - 1) * m, n + age * m)
        a_aug[rows, cols] = np.eye(m)
    return LtiModel(a_aug, b_aug, model.ts)


def relative_degree(model: LtiModel, c, max_search: int) -> Optional[int]:
    """Smallest r >= 1 with C A**(r-1) B nonzero, or None if none within bound.

    "Nonzero" means some entry of the Markov parameter exceeds MARKOV_ZERO_TOL
    in magnitude.
    """
    c = as_matrix(c, "output row")
    if c.shape[0] != 1:
        raise ShapeError(f"output must be a single row, got shape {c.shape}")
    if c.shape[1] != model.n:
        raise ShapeError(
            f"output row has {c.shape[1]} columns but the state dimension is {model.n}"
        )
    if int(max_search) != max_search or max_search < 1:
        raise ValueError(f"search bound must be a positive integer, got {max_search!r}")
    lead = c
    for degree in range(1, int(max_search) + 1):
        markov = lead @ model.b
        if float(np.abs(markov).max()) > MARKOV_ZERO_TOL:
            return degree
        lead = lead @ model.a
    return None
