"""Kernel functions and dense kernel-matrix construction.

The pipeline never maps samples into feature space explicitly; everything
downstream consumes the n x n kernel matrix built here. Data matrices are
m x n with one column per sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

KERNEL_KINDS = (
    "gaussian",      # exp(-||x-y||^2 / sigma^2)
    "heat",          # exp(-||x-y||^2 / (2 sigma^2))
    "poly2",         # (x.y)^2
    "poly3",         # (x.y)^3
    "exponential",   # exp(-||x-y|| / sigma)
    "inv_dist",      # 1 / ||x-y||
    "inv_dist_sq",   # 1 / ||x-y||^2
    "linear",        # x.y
)

# kinds whose formula involves the bandwidth sigma
BANDWIDTH_KINDS = frozenset({"gaussian", "heat", "exponential"})

# kinds that blow up at zero distance and need the diagonal guard
SINGULAR_KINDS = frozenset({"inv_dist", "inv_dist_sq"})


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice plus its parameters.

    ``bandwidth`` may be the string ``"auto"``, in which case it must be
    resolved against a data matrix (mean pairwise distance) before any
    bandwidth-dependent kernel is evaluated. ``diag_guard`` is the smallest
    distance the singular kernels (inv_dist, inv_dist_sq) will invert;
    shorter distances are clamped to it. The linear and polynomial kinds
    ignore the bandwidth entirely; with the linear kind the whole method
    reduces to its input-space (non-kernelized) variant.
    """

    kind: str = "gaussian"
    bandwidth: float | str = "auto"
    diag_guard: float = 1e-8

    def __post_init__(self) -> None:
        if self.kind not in KERNEL_KINDS:
            raise ValueError(
                f"unknown kernel kind {self.kind!r}; expected one of {KERNEL_KINDS}"
            )
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "auto":
                raise ValueError(
                    f"bandwidth must be a positive number or 'auto', got {self.bandwidth!r}"
                )
        elif not self.bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.diag_guard > 0:
            raise ValueError(f"diag_guard must be positive, got {self.diag_guard}")

    @property
    def needs_bandwidth(self) -> bool:
        return self.kind in BANDWIDTH_KINDS

    @property
    def sigma(self) -> float:
        """Resolved bandwidth. Raises if still 'auto'."""
        if isinstance(self.bandwidth, str):
            raise ValueError("bandwidth 'auto' has not been resolved against data")
        return float(self.bandwidth)

    def resolve(self, X: np.ndarray) -> "KernelSpec":
        """Return a spec whose 'auto' bandwidth is replaced by the mean pairwise distance of X."""
        if self.bandwidth == "auto" and self.needs_bandwidth:
            return replace(self, bandwidth=default_bandwidth(X))
        return self


def _pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between all columns of X, exact zero diagonal."""
    g = X.T @ X
    sq_norms = np.diagonal(g)
    sq = sq_norms[:, None] + sq_norms[None, :] - 2.0 * g
    np.maximum(sq, 0.0, out=sq)  # the expansion can go epsilon-negative
    np.fill_diagonal(sq, 0.0)
    return sq


def default_bandwidth(X: np.ndarray) -> float:
    """Mean Euclidean distance over all unordered distinct sample pairs.

    The zero self-distances are excluded; including them would shrink the
    bandwidth by a data-size-dependent factor.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected an m x n data matrix")
    n = X.shape[1]
    if n < 2:
        raise ValueError("bandwidth heuristic needs at least two samples")
    dist = np.sqrt(_pairwise_sq_dists(X))
    iu = np.triu_indices(n, k=1)
    return float(dist[iu].mean())


def kernel_eval(spec: KernelSpec, x, y) -> float:
    """Evaluate the kernel on a single pair of vectors."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")

    kind = spec.kind
    if kind == "linear":
        return float(x @ y)
    if kind == "poly2":
        return float(x @ y) ** 2
    if kind == "poly3":
        return float(x @ y) ** 3

    d2 = float(np.sum((x - y) ** 2))
    if kind == "gaussian":
        return math.exp(-d2 / spec.sigma**2)
    if kind == "heat":
        return math.exp(-d2 / (2.0 * spec.sigma**2))

    d = math.sqrt(d2)
    if kind == "exponential":
        return math.exp(-d / spec.sigma)

    d = max(d, spec.diag_guard)
    if kind == "inv_dist":
        return 1.0 / d
    return 1.0 / (d * d)  # inv_dist_sq


def compute_kernel_matrix(X: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """Dense kernel matrix K with K[i, j] = kernel(x_i, x_j).

    The upper triangle is computed and mirrored, so the result is symmetric
    bit for bit. For gaussian/heat kernels the diagonal is exactly 1. The
    matrix is dense; memory bounds n to roughly 20k samples.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("expected an m x n data matrix")
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least two samples")
    spec = spec.resolve(X)

    kind = spec.kind
    if kind in ("linear", "poly2", "poly3"):
        g = X.T @ X
        if kind == "linear":
            K = g
        elif kind == "poly2":
            K = g**2
        else:
            K = g**3
    else:
        sq = _pairwise_sq_dists(X)
        if kind == "gaussian":
            K = np.exp(-sq / spec.sigma**2)
        elif kind == "heat":
            K = np.exp(-sq / (2.0 * spec.sigma**2))
        else:
            d = np.sqrt(sq)
            if kind == "exponential":
                K = np.exp(-d / spec.sigma)
            else:
                np.maximum(d, spec.diag_guard, out=d)
                K = 1.0 / d if kind == "inv_dist" else 1.0 / (d * d)

    K = np.triu(K) + np.triu(K, 1).T
    return K
