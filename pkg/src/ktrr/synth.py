"""Synthetic datasets with known ground truth.

These drive the selfcheck command and the test suite: concentric circles
(the canonical nonlinear case), Gaussian blobs, and points on orthogonal
linear subspaces (the case plain linear self-expression already solves).
"""

from __future__ import annotations

import numpy as np

from .dataio import Dataset

__all__ = ["make_blobs", "make_circles", "make_subspaces"]


def make_circles(
    n_per_class: int = 100,
    radii=(1.0, 5.0),
    noise: float = 0.05,
    seed: int = 0,
) -> Dataset:
    """Concentric circles in the plane, one class per radius.

    Angles are uniform, and isotropic Gaussian jitter with deviation `noise`
    is added to the coordinates. No linear subspace separates the classes,
    so this is the smallest dataset where the kernel matters.
    """
    rng = np.random.default_rng(seed)
    cols = []
    labels = []
    for c, r in enumerate(radii):
        theta = rng.uniform(0.0, 2.0 * np.pi, size=n_per_class)
        pts = np.stack([r * np.cos(theta), r * np.sin(theta)])
        pts += rng.normal(0.0, noise, size=pts.shape)
        cols.append(pts)
        labels.append(np.full(n_per_class, c, dtype=np.int64))
    X = np.concatenate(cols, axis=1)
    truth = np.concatenate(labels)
    meta = {"source": "synthetic:circles", "radii": tuple(float(r) for r in radii),
            "noise": float(noise), "seed": int(seed)}
    return Dataset(X=X, truth=truth, meta=meta)


def make_blobs(
    centers,
    n_per_class: int = 10,
    spread: float = 1.0,
    seed: int = 0,
) -> Dataset:
    """Isotropic Gaussian blobs around the given center points."""
    centers = np.asarray(centers, dtype=float)
    rng = np.random.default_rng(seed)
    cols = []
    labels = []
    for c, center in enumerate(centers):
        pts = center[:, None] + rng.normal(0.0, spread, size=(centers.shape[1], n_per_class))
        cols.append(pts)
        labels.append(np.full(n_per_class, c, dtype=np.int64))
    X = np.concatenate(cols, axis=1)
    truth = np.concatenate(labels)
    meta = {"source": "synthetic:blobs", "spread": float(spread), "seed": int(seed)}
    return Dataset(X=X, truth=truth, meta=meta)


def make_subspaces(
    num_subspaces: int = 3,
    subspace_dim: int = 1,
    ambient_dim: int = 6,
    n_per_class: int = 10,
    seed: int = 0,
) -> Dataset:
    """Points on mutually orthogonal linear subspaces of a common space.

    Bases come from a QR factorization of a random matrix, sliced into
    disjoint (hence orthogonal) blocks of columns. Coefficients are uniform
    in [0.5, 1.5] with random signs, keeping every point well away from the
    origin where subspaces intersect.
    """
    if num_subspaces * subspace_dim > ambient_dim:
        raise ValueError("ambient dimension too small for orthogonal subspaces")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.normal(size=(ambient_dim, num_subspaces * subspace_dim)))
    cols = []
    labels = []
    for c in range(num_subspaces):
        block = basis[:, c * subspace_dim : (c + 1) * subspace_dim]
        coeffs = rng.uniform(0.5, 1.5, size=(subspace_dim, n_per_class))
        coeffs *= rng.choice([-1.0, 1.0], size=coeffs.shape)
        cols.append(block @ coeffs)
        labels.append(np.full(n_per_class, c, dtype=np.int64))
    X = np.concatenate(cols, axis=1)
    truth = np.concatenate(labels)
    meta = {"source": "synthetic:subspaces", "seed": int(seed)}
    return Dataset(X=X, truth=truth, meta=meta)
