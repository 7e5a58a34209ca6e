"""Kernel truncated ridge regression: closed-form self-expression coefficients.

Each sample is regressed onto all the others in kernel space under an l2
penalty, with the constraint that a sample never uses itself. Writing
U = (K + lambda I)^(-1) and v_i = U k_i, the constrained minimizer is

    c_i = v_i - U e_i * (e_i' v_i) / (e_i' U e_i)

so one factorization of K + lambda I serves every column. Columns are then
hard-thresholded to their eta strongest entries, which is where robustness
to corrupted samples comes from.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "CoefficientMatrix",
    "DegenerateKernelError",
    "Factorization",
    "RegressionParams",
    "factor_regularized_kernel",
    "factorization_count",
    "fit_ktrr",
    "hard_threshold",
    "solve_column",
]


class DegenerateKernelError(np.linalg.LinAlgError):
    """K + lambda*I could not be factored or is numerically singular."""


@dataclass(frozen=True)
class RegressionParams:
    """lam is the l2 tradeoff; eta the number of kept entries per column."""

    lam: float
    eta: int

    def __post_init__(self) -> None:
        if not self.lam > 0:
            raise ValueError(f"lam must be positive, got {self.lam}")
        if int(self.eta) != self.eta or self.eta < 1:
            raise ValueError(f"eta must be a positive integer, got {self.eta}")

    def validate_for(self, n: int) -> None:
        # a column's own index is always excluded, so at most n-1 entries exist
        if self.eta > n - 1:
            raise ValueError(f"eta={self.eta} exceeds n-1={n - 1}")


@dataclass(frozen=True)
class CoefficientMatrix:
    """n x n self-expression coefficients; column i represents sample i.

    ``factorization`` records which matrix factorization produced the
    coefficients ("cholesky" or "lu"), for run reports.
    """

    values: np.ndarray
    thresholded: bool = False
    factorization: str = ""

    def __post_init__(self) -> None:
        v = self.values
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise ValueError(f"coefficient matrix must be square, got {v.shape}")
        if np.any(np.diagonal(v) != 0.0):
            raise ValueError("coefficient diagonal must be exactly zero")

    @property
    def n(self) -> int:
        return self.values.shape[0]


# module-wide instrumentation; tests assert on deltas of factorization_count()
_n_factorizations = 0


def factorization_count() -> int:
    """Total factorizations performed since import (monotone counter)."""
    return _n_factorizations


class Factorization:
    """Immutable factorization of K + lambda*I, reusable for many solves.

    Tries Cholesky first; non-PSD kernels (inverse-distance families) fall
    back to pivoted LU. ``method`` records which path was taken so runs can
    report it.
    """

    def __init__(self, method: str, factor, n: int):
        self.method = method
        self._factor = factor
        self.n = n

    def solve(self, B: np.ndarray) -> np.ndarray:
        """Solve (K + lambda*I) X = B for one vector or a stack of columns."""
        if self.method == "cholesky":
            return scipy.linalg.cho_solve(self._factor, B)
        return scipy.linalg.lu_solve(self._factor, B)


def factor_regularized_kernel(K: np.ndarray, lam: float) -> Factorization:
    """Factor K + lam*I once; raise DegenerateKernelError if singular."""
    global _n_factorizations
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"kernel matrix must be square, got {K.shape}")
    if not lam > 0:
        raise ValueError(f"lam must be positive, got {lam}")

    n = K.shape[0]
    A = K + lam * np.eye(n)
    try:
        factor = scipy.linalg.cho_factor(A, lower=True)
        method = "cholesky"
    except np.linalg.LinAlgError:
        factor = scipy.linalg.lu_factor(A)
        method = "lu"
        # lu_factor does not raise on singular input; a zero pivot means
        # K + lam*I has no inverse and the closed form is meaningless
        pivots = np.abs(np.diagonal(factor[0]))
        if np.min(pivots) <= n * np.finfo(float).eps * np.max(pivots, initial=0.0):
            raise DegenerateKernelError(
                f"K + {lam}*I is numerically singular (smallest pivot {np.min(pivots):.3e})"
            )
    _n_factorizations += 1
    return Factorization(method=method, factor=factor, n=n)


def solve_column(fact: Factorization, K: np.ndarray, i: int) -> np.ndarray:
    """Coefficient vector c_i for sample i from a shared factorization."""
    K = np.asarray(K, dtype=float)
    n = fact.n
    if not 0 <= i < n:
        raise IndexError(f"column index {i} out of range for n={n}")

    v_i = fact.solve(K[:, i])
    e_i = np.zeros(n)
    e_i[i] = 1.0
    u_i = fact.solve(e_i)  # column i of U, by symmetry of K + lam*I
    if u_i[i] == 0.0:
        raise DegenerateKernelError("e_i' U e_i = 0; factorization is degenerate")
    c_i = v_i - u_i * (v_i[i] / u_i[i])
    c_i[i] = 0.0  # kill the ~1e-16 residue; downstream relies on exact zeros
    return c_i


def fit_ktrr(K: np.ndarray, params: RegressionParams) -> CoefficientMatrix:
    """All n coefficient columns from a single factorization of K + lam*I.

    Solves against K and I in two batched calls, which is column-for-column
    the same computation solve_column performs one i at a time. Cost is one
    O(n^3) factorization plus O(n^2) per column.
    """
    K = np.asarray(K, dtype=float)
    n = K.shape[0]
    params.validate_for(n)
    fact = factor_regularized_kernel(K, params.lam)
    V = fact.solve(K)          # V[:, i] = U k_i
    U = fact.solve(np.eye(n))
    C = V - U * (np.diagonal(V) / np.diagonal(U))[None, :]
    np.fill_diagonal(C, 0.0)
    return CoefficientMatrix(values=C, thresholded=False, factorization=fact.method)


def hard_threshold(C: CoefficientMatrix, eta: int, mode: str = "magnitude") -> CoefficientMatrix:
    """Keep the eta strongest entries of each column, zero the rest.

    "Strongest" means largest absolute value by default; mode="signed" ranks
    by raw value instead. Kept entries retain their original signed values.
    Ties at the boundary go to the lowest index.
    """
    if C.thresholded:
        raise ValueError("coefficient matrix is already thresholded")
    if mode not in ("magnitude", "signed"):
        raise ValueError(f"mode must be 'magnitude' or 'signed', got {mode!r}")
    n = C.n
    if int(eta) != eta or not 1 <= eta <= n - 1:
        raise ValueError(f"eta must be an integer in [1, {n - 1}], got {eta}")

    vals = C.values
    key = np.abs(vals) if mode == "magnitude" else vals
    # stable descending sort: equal keys keep their original (low-first) order
    order = np.argsort(-key, axis=0, kind="stable")
    keep = order[: int(eta), :]
    out = np.zeros_like(vals)
    np.put_along_axis(out, keep, np.take_along_axis(vals, keep, axis=0), axis=0)
    np.fill_diagonal(out, 0.0)  # a kept zero is still zero, but be explicit
    return CoefficientMatrix(values=out, thresholded=True, factorization=C.factorization)
