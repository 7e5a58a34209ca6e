"""Clustering agreement metrics: accuracy, NMI, ARI, pairwise F-score.

All four are computed from one contingency table and are invariant to how
either side names its clusters. ARI and the F-score run on exact integer
pair counts so that small rational results (like -0.5) come out exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = ["accuracy", "ari", "contingency_table", "fscore", "nmi"]


def _as_labels(x) -> np.ndarray:
    """Accept a Labeling or a plain sequence of integer labels."""
    arr = np.asarray(getattr(x, "labels", x))
    if arr.ndim != 1:
        raise ValueError(f"labels must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError("labels must be nonempty")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.array_equal(arr, rounded):
            raise ValueError("labels must be integers")
        arr = rounded.astype(np.int64)
    return arr


@dataclass(frozen=True)
class ContingencyTable:
    """counts[i, j] = points in predicted cluster i and true cluster j."""

    counts: np.ndarray
    n: int


def contingency_table(pred, truth) -> ContingencyTable:
    p = _as_labels(pred)
    t = _as_labels(truth)
    if p.shape[0] != t.shape[0]:
        raise ValueError(f"length mismatch: {p.shape[0]} vs {t.shape[0]}")
    _, pi = np.unique(p, return_inverse=True)
    _, ti = np.unique(t, return_inverse=True)
    kp = int(pi.max()) + 1
    kt = int(ti.max()) + 1
    counts = np.zeros((kp, kt), dtype=np.int64)
    np.add.at(counts, (pi, ti), 1)
    return ContingencyTable(counts=counts, n=p.shape[0])


def accuracy(pred, truth) -> float:
    """Fraction matched under the best one-to-one relabeling of clusters.

    Optimal assignment on the contingency table; rectangular tables (unequal
    cluster counts) are handled directly, which is equivalent to padding
    with zero rows or columns.
    """
    ct = contingency_table(pred, truth)
    rows, cols = linear_sum_assignment(ct.counts, maximize=True)
    return float(ct.counts[rows, cols].sum()) / ct.n


def nmi(pred, truth, norm: str = "sqrt") -> float:
    """Mutual information over the normalizer chosen by `norm`.

    norm is one of sqrt (geometric mean of the entropies, the default),
    max, or min. Conventions for the degenerate partitions: both sides
    single-cluster gives 1.0; exactly one side with zero entropy gives 0.0.
    Natural log throughout (the normalization cancels the base anyway).
    """
    if norm not in ("sqrt", "max", "min"):
        raise ValueError(f"norm must be sqrt, max, or min, got {norm!r}")
    ct = contingency_table(pred, truth)
    n = ct.n
    counts = ct.counts
    a = counts.sum(axis=1)  # predicted cluster sizes
    b = counts.sum(axis=0)  # true cluster sizes

    def entropy(sizes):
        p = sizes[sizes > 0] / n
        return float(-np.sum(p * np.log(p)))

    hp, ht = entropy(a), entropy(b)
    if hp == 0.0 and ht == 0.0:
        return 1.0
    if hp == 0.0 or ht == 0.0:
        return 0.0

    nz = counts > 0
    # identical partitions (a permutation table) score exactly 1; computing
    # MI and the entropies separately can land an ulp below it
    if (
        counts.shape[0] == counts.shape[1]
        and np.all(nz.sum(axis=0) == 1)
        and np.all(nz.sum(axis=1) == 1)
    ):
        return 1.0
    pij = counts[nz] / n
    outer = (a[:, None] * b[None, :])[nz] / (n * n)
    mi = float(np.sum(pij * np.log(pij / outer)))

    if norm == "sqrt":
        denom = math.sqrt(hp * ht)
    elif norm == "max":
        denom = max(hp, ht)
    else:
        denom = min(hp, ht)
    return min(1.0, max(0.0, mi / denom))


def _pair_counts(ct: ContingencyTable):
    """Exact same-cluster pair counts as Python integers."""
    def choose2(v) -> int:
        return int(sum(int(x) * (int(x) - 1) // 2 for x in np.ravel(v)))

    together_both = choose2(ct.counts)
    together_pred = choose2(ct.counts.sum(axis=1))
    together_truth = choose2(ct.counts.sum(axis=0))
    total = ct.n * (ct.n - 1) // 2
    return together_both, together_pred, together_truth, total


def ari(pred, truth) -> float:
    """Adjusted Rand index: pair agreement corrected for chance, in [-1, 1].

    Evaluated as a ratio of exact integers. The degenerate case where the
    expected and maximal index coincide (both partitions all-singletons or
    both single-cluster, hence identical) is defined as 1.0.
    """
    ct = contingency_table(pred, truth)
    if ct.n < 2:
        raise ValueError("ari needs at least two points")
    index, a, b, total = _pair_counts(ct)
    num = 2 * (total * index - a * b)
    den = (a + b) * total - 2 * a * b
    if den == 0:
        return 1.0
    return num / den


def fscore(pred, truth) -> float:
    """Pairwise F1 over same-cluster pairs: harmonic mean of precision and recall.

    Precision is the fraction of predicted same-cluster pairs that the truth
    also puts together; recall is the converse. Defined as 0.0 when there are
    no same-cluster pairs on either side (precision + recall = 0).
    """
    ct = contingency_table(pred, truth)
    if ct.n < 2:
        raise ValueError("fscore needs at least two points")
    tp, pairs_pred, pairs_truth, _ = _pair_counts(ct)
    # algebraically 2PR/(P+R) with P = tp/pairs_pred, R = tp/pairs_truth
    if pairs_pred + pairs_truth == 0:
        return 0.0
    return 2 * tp / (pairs_pred + pairs_truth)
