import numpy as np
import pytest

from ktrr import solver
from ktrr.solver import (
    CoefficientMatrix,
    DegenerateKernelError,
    RegressionParams,
    factor_regularized_kernel,
    factorization_count,
    fit_ktrr,
    hard_threshold,
    solve_column,
)


def _gram(n, seed, rank=None):
    """Random PSD kernel from a Gram matrix A'A."""
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(rank or n + 2, n))
    return A.T @ A


def _oracle_column(K, lam, i):
    """Constrained minimizer via the bordered stationarity system.

    Minimizing k_ii - 2 k_i'c + c'Kc + lam c'c subject to c_i = 0 gives
    (K + lam I) c + theta e_i = k_i together with e_i'c = 0; solve the
    (n+1) x (n+1) system directly, no shared factorization involved.
    """
    n = K.shape[0]
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = K + lam * np.eye(n)
    A[:n, n] = 0.0
    A[i, n] = 1.0
    A[n, i] = 1.0
    rhs = np.zeros(n + 1)
    rhs[:n] = K[:, i]
    return np.linalg.solve(A, rhs)[:n]


def _objective(K, lam, i, c):
    return K[i, i] - 2.0 * K[:, i] @ c + c @ K @ c + lam * c @ c


@pytest.mark.parametrize("lam", [0.01, 0.5, 5.0])
def test_solve_column_matches_bordered_system(lam):
    for seed in range(8):
        n = 4 + seed
        K = _gram(n, seed)
        fact = factor_regularized_kernel(K, lam)
        for i in range(n):
            got = solve_column(fact, K, i)
            want = _oracle_column(K, lam, i)
            assert np.max(np.abs(got - want)) < 1e-8
            assert got[i] == 0.0


def test_fit_stacks_the_per_column_solutions():
    K = _gram(9, seed=11)
    params = RegressionParams(lam=0.3, eta=4)
    C = fit_ktrr(K, params)
    fact = factor_regularized_kernel(K, 0.3)
    for i in range(9):
        assert np.allclose(C.values[:, i], solve_column(fact, K, i), atol=1e-10)
    assert not C.thresholded
    assert C.factorization == "cholesky"


def test_perturbing_the_solution_never_improves_the_objective():
    """First-order optimality, checked directly against the loss."""
    K = _gram(7, seed=2)
    lam = 0.5
    fact = factor_regularized_kernel(K, lam)
    rng = np.random.default_rng(3)
    for i in range(7):
        c = solve_column(fact, K, i)
        base = _objective(K, lam, i, c)
        for _ in range(20):
            delta = rng.normal(size=7) * 1e-3
            delta[i] = 0.0  # stay feasible
            assert _objective(K, lam, i, c + delta) >= base - 1e-12


def test_single_factorization_per_fit():
    K = _gram(30, seed=5)
    before = factorization_count()
    fit_ktrr(K, RegressionParams(lam=1.0, eta=3))
    assert factorization_count() - before == 1
    fit_ktrr(K, RegressionParams(lam=1.0, eta=3))
    fit_ktrr(K, RegressionParams(lam=2.0, eta=3))
    assert factorization_count() - before == 3


def test_solve_column_reuses_the_factorization():
    K = _gram(12, seed=6)
    fact = factor_regularized_kernel(K, 0.7)
    before = factorization_count()
    for i in range(12):
        solve_column(fact, K, i)
    assert factorization_count() == before


def test_larger_lambda_shrinks_the_coefficients():
    # ridge shrinkage; generic data, so monotone in practice
    K = _gram(10, seed=7)
    norms = []
    for lam in (0.01, 0.1, 1.0, 10.0):
        C = fit_ktrr(K, RegressionParams(lam=lam, eta=3))
        norms.append(np.linalg.norm(C.values))
    for a, b in zip(norms, norms[1:]):
        assert b <= a + 1e-12


def test_indefinite_kernel_falls_back_to_lu():
    # inverse-distance kernels are not PSD; emulate with an indefinite diagonal
    K = np.diag([-5.0, 1.0, 2.0, 3.0])
    fact = factor_regularized_kernel(K, 1.0)
    assert fact.method == "lu"
    C = fit_ktrr(K, RegressionParams(lam=1.0, eta=2))
    assert C.factorization == "lu"
    for i in range(4):
        want = _oracle_column(K, 1.0, i)
        assert np.max(np.abs(C.values[:, i] - want)) < 1e-8


def test_singular_regularized_kernel_raises():
    # eigenvalues of K + I become {0, 2, 3}: no inverse, no closed form
    rng = np.random.default_rng(8)
    Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    K = Q @ np.diag([-1.0, 1.0, 2.0]) @ Q.T
    K = (K + K.T) / 2.0
    with pytest.raises(DegenerateKernelError):
        factor_regularized_kernel(K, 1.0)


def test_factor_input_validation():
    with pytest.raises(ValueError):
        factor_regularized_kernel(np.zeros((2, 3)), 1.0)
    with pytest.raises(ValueError):
        factor_regularized_kernel(np.eye(3), 0.0)
    fact = factor_regularized_kernel(np.eye(3), 1.0)
    with pytest.raises(IndexError):
        solve_column(fact, np.eye(3), 3)


def test_regression_params_validation():
    with pytest.raises(ValueError):
        RegressionParams(lam=0.0, eta=3)
    with pytest.raises(ValueError):
        RegressionParams(lam=1.0, eta=0)
    params = RegressionParams(lam=1.0, eta=10)
    with pytest.raises(ValueError):
        params.validate_for(10)  # eta must leave room for the zero diagonal
    params.validate_for(11)


def test_coefficient_matrix_requires_zero_diagonal():
    with pytest.raises(ValueError):
        CoefficientMatrix(values=np.eye(3))
    with pytest.raises(ValueError):
        CoefficientMatrix(values=np.zeros((2, 3)))


def test_threshold_keeps_eta_per_column():
    C = fit_ktrr(_gram(12, seed=9), RegressionParams(lam=0.2, eta=4))
    T = hard_threshold(C, 4)
    assert T.thresholded
    assert np.all(np.count_nonzero(T.values, axis=0) == 4)
    # every kept entry is at least as strong as every dropped one
    for i in range(12):
        kept = np.abs(T.values[:, i])[T.values[:, i] != 0]
        dropped = np.abs(C.values[:, i])[(T.values[:, i] == 0) & (C.values[:, i] != 0)]
        if kept.size and dropped.size:
            assert kept.min() >= dropped.max()


def test_threshold_keeps_original_signed_values():
    C = fit_ktrr(_gram(8, seed=10), RegressionParams(lam=0.2, eta=3))
    T = hard_threshold(C, 3)
    mask = T.values != 0
    assert np.array_equal(T.values[mask], C.values[mask])


def test_threshold_ties_go_to_the_lowest_index():
    vals = np.zeros((4, 4))
    vals[:, 0] = [0.0, 2.0, 2.0, 2.0]
    C = CoefficientMatrix(values=vals)
    T = hard_threshold(C, 2)
    assert list(np.flatnonzero(T.values[:, 0])) == [1, 2]


def test_threshold_signed_mode_ranks_by_raw_value():
    vals = np.zeros((4, 4))
    vals[:, 1] = [-9.0, 0.0, 1.0, 2.0]
    C = CoefficientMatrix(values=vals)
    mag = hard_threshold(C, 2, mode="magnitude")
    assert set(np.flatnonzero(mag.values[:, 1])) == {0, 3}
    signed = hard_threshold(C, 2, mode="signed")
    assert set(np.flatnonzero(signed.values[:, 1])) == {2, 3}


def test_threshold_rejects_double_application_and_bad_eta():
    C = fit_ktrr(_gram(6, seed=12), RegressionParams(lam=0.2, eta=2))
    T = hard_threshold(C, 2)
    with pytest.raises(ValueError):
        hard_threshold(T, 2)
    with pytest.raises(ValueError):
        hard_threshold(C, 0)
    with pytest.raises(ValueError):
        hard_threshold(C, 6)
    with pytest.raises(ValueError):
        hard_threshold(C, 2, mode="topk")
