"""Affinity graph, normalized Laplacian, and spectral embedding.

The thresholded coefficients become an undirected weighted graph, W = |C'| + |C|,
whose normalized Laplacian L = I - D^(-1/2) W D^(-1/2) is eigendecomposed. Rows
of the bottom eigenvectors, unit-normalized, are the points handed to k-means.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .solver import CoefficientMatrix

__all__ = [
    "AffinityMatrix",
    "SpectralEmbedding",
    "build_affinity",
    "normalized_laplacian",
    "spectral_embedding",
]

# Laplacian eigenvalue below this counts as zero (graph component indicator)
ZERO_EIG_TOL = 1e-8

# stand-in degree for isolated vertices so D^(-1/2) stays finite
ISOLATED_DEGREE = 1e-12


@dataclass(frozen=True)
class AffinityMatrix:
    """Symmetric nonnegative similarity matrix with zero diagonal."""

    values: np.ndarray

    def __post_init__(self) -> None:
        W = self.values
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise ValueError(f"affinity must be square, got {W.shape}")
        if not np.array_equal(W, W.T):
            raise ValueError("affinity must be exactly symmetric")
        if np.any(W < 0):
            raise ValueError("affinity entries must be nonnegative")
        if np.any(np.diagonal(W) != 0.0):
            raise ValueError("affinity diagonal must be zero")

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def isolated_vertices(self) -> np.ndarray:
        """Indices with zero degree (no similarity to any other sample)."""
        return np.flatnonzero(self.values.sum(axis=1) == 0.0)


@dataclass(frozen=True)
class SpectralEmbedding:
    """Row-normalized bottom eigenvectors of the Laplacian.

    Y is n x L with unit-norm rows; ``eigenvalues`` are the L retained
    eigenvalues in ascending order; ``zero_rows`` lists rows that were
    exactly zero before normalization (left as zero).
    """

    Y: np.ndarray
    eigenvalues: np.ndarray
    zero_rows: tuple = ()

    @property
    def zero_eig_count(self) -> int:
        return int(np.sum(self.eigenvalues <= ZERO_EIG_TOL))


def build_affinity(C: CoefficientMatrix) -> AffinityMatrix:
    """W = |C'| + |C|, mirrored from the upper triangle so symmetry is bitwise."""
    if not C.thresholded:
        raise ValueError("coefficients must be thresholded before building the affinity")
    A = np.abs(C.values)
    S = A.T + A
    W = np.triu(S) + np.triu(S, 1).T
    return AffinityMatrix(values=W)


def normalized_laplacian(W) -> np.ndarray:
    """L = I - D^(-1/2) W D^(-1/2) with D the diagonal degree matrix.

    Accepts an AffinityMatrix or a plain symmetric nonnegative array.
    Isolated vertices get degree ISOLATED_DEGREE instead of zero, which
    leaves their Laplacian row equal to e_i; callers that care should check
    AffinityMatrix.isolated_vertices() and flag them.
    """
    W = np.asarray(getattr(W, "values", W), dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"affinity must be square, got {W.shape}")
    if not np.allclose(W, W.T):
        raise ValueError("affinity must be symmetric")
    if np.any(W < 0):
        raise ValueError("affinity entries must be nonnegative")

    d = W.sum(axis=1)
    d = np.where(d == 0.0, ISOLATED_DEGREE, d)
    inv_sqrt = 1.0 / np.sqrt(d)
    L = -(W * inv_sqrt[:, None] * inv_sqrt[None, :])
    np.fill_diagonal(L, np.diagonal(L) + 1.0)
    L = np.triu(L) + np.triu(L, 1).T  # scaling breaks bitwise symmetry; restore it
    return L


def _fix_eigenvector_signs(V: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive.

    Eigenvectors are only defined up to sign; LAPACK's choice can vary with
    threading and backend, and downstream determinism needs one convention.
    """
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs[None, :]


def spectral_embedding(
    L: np.ndarray,
    num_clusters: int,
    skip_zero_eigs: bool = False,
) -> SpectralEmbedding:
    """Rows of the eigenvectors for the num_clusters smallest eigenvalues.

    Zero eigenvalues are included by default: for a graph that separates
    cleanly into components, the informative indicator eigenvectors sit at
    eigenvalue exactly zero, and skipping them would discard the signal.
    skip_zero_eigs=True starts above ZERO_EIG_TOL instead, for the stricter
    "smallest nonzero" reading.

    Rows of the stacked eigenvectors are normalized to unit length; rows that
    are exactly zero are left as zero and reported in ``zero_rows``.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if L.ndim != 2 or L.shape[1] != n:
        raise ValueError(f"Laplacian must be square, got {L.shape}")
    if not 1 <= num_clusters < n:
        raise ValueError(f"num_clusters must be in [1, {n - 1}], got {num_clusters}")

    lo = 0
    if skip_zero_eigs:
        all_eigs = scipy.linalg.eigvalsh(L)
        lo = int(np.sum(all_eigs <= ZERO_EIG_TOL))
        if lo + num_clusters > n:
            raise ValueError(
                f"only {n - lo} nonzero eigenvalues available, need {num_clusters}"
            )
    try:
        eigs, V = scipy.linalg.eigh(L, subset_by_index=[lo, lo + num_clusters - 1])
    except scipy.linalg.LinAlgError as err:
        raise scipy.linalg.LinAlgError(
            f"eigendecomposition failed: {err}; "
            f"cond(L)={np.linalg.cond(L):.3e}, ||L||_max={np.abs(L).max():.3e}"
        ) from err

    V = _fix_eigenvector_signs(V)
    norms = np.linalg.norm(V, axis=1)
    zero_rows = np.flatnonzero(norms == 0.0)
    safe = np.where(norms == 0.0, 1.0, norms)
    Y = V / safe[:, None]
    return SpectralEmbedding(Y=Y, eigenvalues=eigs, zero_rows=tuple(int(r) for r in zero_rows))
