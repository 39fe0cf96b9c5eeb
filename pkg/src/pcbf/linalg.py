"""Small dense-matrix helpers shared by the dynamics, barrier, and solver code.

Everything operates on 2-D float64 numpy arrays. Problem sizes are tiny
(state dimensions below ten), so the goals are strict shape/finiteness
checking and deterministic results, not throughput.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import lu_factor, lu_solve

SINGULAR_PIVOT_TOL = 1e-12


class ShapeError(ValueError):
    """Operands have incompatible or malformed shapes, or non-finite entries."""


class SingularMatrixError(ValueError):
    """A linear solve hit a pivot below the singularity threshold."""

    def __init__(self, message: str, pivot: float):
        super().__init__(message)
        self.pivot = pivot


def as_matrix(value, name: str = "matrix") -> np.ndarray:
    """Copy `value` into a validated 2-D float array.

    Rejects empty shapes and NaN/Inf entries; every public operation in this
    package funnels its inputs through here.
    """
    arr = np.array(value, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ShapeError(f"{name} must be 2-D with positive dimensions, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ShapeError(f"{name} contains non-finite entries")
    return arr


def column(values, name: str = "vector") -> np.ndarray:
    """Copy `values` into an (n, 1) column."""
    arr = np.array(values, dtype=float).reshape(-1, 1)
    return as_matrix(arr, name)


def mat_mul(a, b) -> np.ndarray:
    """Matrix product with explicit conformability checking."""
    a = as_matrix(a, "left factor")
    b = as_matrix(b, "right factor")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def mat_pow(a, p: int) -> np.ndarray:
    """A**p for a square matrix, with A**0 = I."""
    a = as_matrix(a, "base")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"matrix power needs a square matrix, got shape {a.shape}")
    if int(p) != p or p < 0:
        raise ValueError(f"exponent must be a nonnegative integer, got {p!r}")
    return np.linalg.matrix_power(a, int(p))


def power_sum(a, terms: int) -> np.ndarray:
    """Sum of A**i for i = 0..terms-1, by accumulation.

    No inversion of (A - I): the accumulator form stays valid when A has an
    eigenvalue at 1, as it does for integrators.
    """
    a = as_matrix(a, "base")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"power sum needs a square matrix, got shape {a.shape}")
    if int(terms) != terms or terms < 1:
        raise ValueError(f"term count must be a positive integer, got {terms!r}")
    total = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for _ in range(int(terms) - 1):
        term = term @ a
        total = total + term
    return total


def solve(a, b) -> np.ndarray:
    """Solve a @ x = b by partial-pivot LU.

    Pivots below SINGULAR_PIVOT_TOL raise SingularMatrixError carrying the
    offending pivot magnitude.
    """
    a = as_matrix(a, "coefficient matrix")
    b = as_matrix(b, "right-hand side")
    if a.shape[0] != a.shape[1]:
        raise ShapeError(f"solve needs a square coefficient matrix, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeError(f"right-hand side rows {b.shape[0]} do not match system size {a.shape[0]}")
    with warnings.catch_warnings():
        # scipy warns on exactly-zero pivots; the explicit check below raises instead.
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(a)
    pivot = float(np.abs(np.diag(lu)).min())
    if pivot < SINGULAR_PIVOT_TOL:
        raise SingularMatrixError(
            f"matrix is singular to working precision (smallest pivot {pivot:.3e})", pivot
        )
    return lu_solve((lu, piv), b)
