"""Invariant suite over synthetic data, behind `ktrr selfcheck`.

Each check prints one line; any failure flips the exit code. This is a fast
smoke layer, not the test suite: it verifies the library's core invariants
hold on data generated on the spot, with no files or config needed.
"""

from __future__ import annotations

import numpy as np

from .config import ExperimentConfig
from .experiment import cluster_pipeline
from .graph import build_affinity, normalized_laplacian, spectral_embedding
from .kernels import KernelSpec, compute_kernel_matrix
from .metrics import accuracy, ari, fscore, nmi
from .solver import RegressionParams, factorization_count, fit_ktrr, hard_threshold
from .synth import make_circles, make_subspaces

__all__ = ["run_selfcheck"]


def _checks():
    ds = make_circles(n_per_class=40, noise=0.05, seed=7)
    K = compute_kernel_matrix(ds.X, KernelSpec(kind="gaussian"))
    lam, eta = 0.1, 5

    before = factorization_count()
    C = fit_ktrr(K, RegressionParams(lam=lam, eta=eta))
    n_factored = factorization_count() - before

    def coefficients():
        assert n_factored == 1, f"expected 1 factorization, saw {n_factored}"
        assert np.all(np.diagonal(C.values) == 0.0), "nonzero coefficient diagonal"
        # stationarity: the gradient (K + lam I)c_i - k_i may only point along e_i
        G = (K + lam * np.eye(K.shape[0])) @ C.values - K
        np.fill_diagonal(G, 0.0)
        worst = np.abs(G).max()
        assert worst <= 1e-8, f"gradient residual {worst:.2e}"

    Ct = hard_threshold(C, eta)

    def thresholding():
        nnz = np.count_nonzero(Ct.values, axis=0)
        assert nnz.max() <= eta, f"column with {nnz.max()} nonzeros exceeds eta={eta}"
        kept = Ct.values != 0
        assert np.array_equal(Ct.values[kept], C.values[kept]), "kept values were altered"

    W = build_affinity(Ct)

    def affinity():
        assert np.array_equal(W.values, W.values.T), "affinity not exactly symmetric"
        assert np.all(W.values >= 0), "negative affinity entry"
        assert np.all(np.diagonal(W.values) == 0), "nonzero affinity diagonal"

    L = normalized_laplacian(W)

    def laplacian():
        d = W.values.sum(axis=1)
        null_residual = np.linalg.norm(L @ np.sqrt(d))
        assert null_residual <= 1e-9, f"null-vector residual {null_residual:.2e}"
        eigs = np.linalg.eigvalsh(L)
        assert eigs[0] >= -1e-8, f"negative eigenvalue {eigs[0]:.2e}"
        assert eigs[-1] <= 2 + 1e-10, f"eigenvalue above 2: {eigs[-1]:.6f}"

    def embedding_rows():
        emb = spectral_embedding(L, 2)
        norms = np.linalg.norm(emb.Y, axis=1)
        keep = np.ones(len(norms), dtype=bool)
        keep[list(emb.zero_rows)] = False
        assert np.allclose(norms[keep], 1.0, atol=1e-12), "embedding rows not unit norm"

    def metric_axioms():
        labels = ds.truth
        for metric in (accuracy, nmi, ari, fscore):
            value = metric(labels, labels)
            assert value == 1.0, f"{metric.__name__}(x, x) = {value}"
        assert ari([0, 0, 1, 1], [0, 1, 0, 1]) == -0.5, "ARI spot value"
        rng = np.random.default_rng(3)
        a = rng.integers(0, 3, size=30)
        relabeled = np.array([2, 0, 1])[a]
        for metric in (accuracy, nmi, ari, fscore):
            assert metric(a, ds.truth[:30]) == metric(relabeled, ds.truth[:30]), (
                f"{metric.__name__} not relabel-invariant"
            )

    base = {
        "dataset": {"kind": "circles", "n_per_class": 40, "noise": 0.05, "data_seed": 7},
        "lambda": 0.1,
        "eta": 5,
        "num_clusters": 2,
        "kmeans": {"restarts": 30},
        "seed": 11,
    }
    cfg = ExperimentConfig(base)

    def determinism():
        first = cluster_pipeline(ds.X, cfg)
        second = cluster_pipeline(ds.X, cfg)
        assert np.array_equal(first.labels, second.labels), "pipeline not deterministic"
        assert first.inertia == second.inertia, "inertia not deterministic"

    def circles_gaussian():
        labeling = cluster_pipeline(ds.X, cfg)
        score = accuracy(labeling, ds.truth)
        assert score >= 0.95, f"gaussian kernel accuracy {score:.3f} on circles"

    def circles_linear_fails():
        linear_cfg = ExperimentConfig({**base, "kernel": {"kind": "linear"}})
        labeling = cluster_pipeline(ds.X, linear_cfg)
        score = accuracy(labeling, ds.truth)
        assert score <= 0.80, f"linear kernel unexpectedly reached {score:.3f} on circles"

    def subspaces_linear():
        sub = make_subspaces(num_subspaces=3, n_per_class=10, seed=5)
        sub_cfg = ExperimentConfig(
            {
                "dataset": {"kind": "subspaces"},
                "kernel": {"kind": "linear"},
                "lambda": 0.1,
                "eta": 5,
                "num_clusters": 3,
                "kmeans": {"restarts": 30},
                "seed": 11,
            }
        )
        labeling = cluster_pipeline(sub.X, sub_cfg)
        score = accuracy(labeling, sub.truth)
        assert score == 1.0, f"linear kernel accuracy {score:.3f} on orthogonal subspaces"

    return [
        ("one factorization, zero diagonal, stationary columns", coefficients),
        ("thresholded columns keep at most eta original entries", thresholding),
        ("affinity is symmetric, nonnegative, hollow", affinity),
        ("Laplacian annihilates sqrt-degrees; spectrum in [0, 2]", laplacian),
        ("embedding rows are unit norm", embedding_rows),
        ("metrics: identity = 1, relabel-invariant, ARI spot value", metric_axioms),
        ("pipeline is deterministic for a fixed seed", determinism),
        ("gaussian kernel separates concentric circles", circles_gaussian),
        ("linear kernel cannot separate concentric circles", circles_linear_fails),
        ("linear kernel solves orthogonal linear subspaces exactly", subspaces_linear),
    ]


def run_selfcheck() -> int:
    failures = 0
    for name, fn in _checks():
        try:
            fn()
        except AssertionError as err:
            failures += 1
            print(f"FAIL {name}: {err}")
        else:
            print(f"ok   {name}")
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0
