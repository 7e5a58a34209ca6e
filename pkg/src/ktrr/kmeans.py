"""Restarted Lloyd k-means with k-means++ seeding over embedding rows.

Each restart draws from its own counter-derived RNG stream, so restart r
produces the same result no matter how many restarts run or in what order.
The best labeling (minimal inertia, lowest restart index on ties) wins.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["KMeansParams", "Labeling", "kmeans"]


@dataclass(frozen=True)
class KMeansParams:
    k: int
    restarts: int = 500
    max_iters: int = 100
    seed: int = 0
    tol: float = 1e-9  # relative inertia improvement below this stops Lloyd

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.restarts < 1:
            raise ValueError(f"restarts must be positive, got {self.restarts}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be positive, got {self.max_iters}")
        if self.tol < 0:
            raise ValueError(f"tol must be nonnegative, got {self.tol}")


@dataclass(frozen=True)
class Labeling:
    """Cluster assignment for n points plus its within-cluster sum of squares."""

    labels: np.ndarray
    inertia: float

    @property
    def n(self) -> int:
        return self.labels.shape[0]


def _plusplus_init(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding: each new center drawn proportional to squared distance."""
    n = X.shape[0]
    centers = np.empty((k, X.shape[1]))
    centers[0] = X[rng.integers(n)]
    d2 = np.sum((X - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            # remaining points coincide with chosen centers; any point will do
            idx = rng.integers(n)
        centers[j] = X[idx]
        np.minimum(d2, np.sum((X - centers[j]) ** 2, axis=1), out=d2)
    return centers


def _assign(X: np.ndarray, centers: np.ndarray):
    """Nearest-center labels and the squared distance to that center."""
    d2 = np.sum((X[:, None, :] - centers[None, :, :]) ** 2, axis=2)
    labels = np.argmin(d2, axis=1)  # ties go to the lowest center index
    return labels, d2[np.arange(X.shape[0]), labels]


def _repair_empty(X, labels, d2min, k):
    """Reseed each empty cluster with the point farthest from its own center.

    Donors must keep at least one member so the repair cannot cascade into a
    new empty cluster. Moving the worst-placed point to its own cluster only
    removes its distance contribution, so inertia cannot increase.
    """
    counts = np.bincount(labels, minlength=k)
    if np.all(counts > 0):
        return labels
    labels = labels.copy()
    d2min = d2min.copy()
    order = np.argsort(-d2min, kind="stable")
    for j in np.flatnonzero(counts == 0):
        for p in order:
            if counts[labels[p]] > 1:
                counts[labels[p]] -= 1
                labels[p] = j
                counts[j] = 1
                d2min[p] = 0.0
                order = np.argsort(-d2min, kind="stable")
                break
    return labels


def _lloyd(X: np.ndarray, k: int, max_iters: int, tol: float, rng: np.random.Generator):
    n = X.shape[0]
    centers = _plusplus_init(X, k, rng)
    prev = np.inf
    labels = np.zeros(n, dtype=np.intp)
    for _ in range(max_iters):
        labels, d2min = _assign(X, centers)
        labels = _repair_empty(X, labels, d2min, k)
        for j in range(k):
            centers[j] = X[labels == j].mean(axis=0)
        inertia = float(np.sum((X - centers[labels]) ** 2))
        # Lloyd is monotone; anything beyond float wobble means a bug
        assert inertia <= prev * (1 + 1e-12) + 1e-12
        if prev - inertia <= tol * max(prev, 1e-300):
            prev = inertia
            break
        prev = inertia
    return labels, prev


def kmeans(points: np.ndarray, params: KMeansParams) -> Labeling:
    """Best-of-`restarts` k-means labeling, deterministic for a fixed seed."""
    X = np.asarray(points, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError(f"points must be a nonempty n x d matrix, got shape {X.shape}")
    if params.k > X.shape[0]:
        raise ValueError(f"k={params.k} exceeds number of points {X.shape[0]}")

    best_labels = None
    best_inertia = np.inf
    for r in range(params.restarts):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=params.seed, spawn_key=(r,))
        )
        labels, inertia = _lloyd(X, params.k, params.max_iters, params.tol, rng)
        if inertia < best_inertia:  # strict: ties keep the earliest restart
            best_inertia = inertia
            best_labels = labels
    return Labeling(labels=best_labels, inertia=float(best_inertia))
