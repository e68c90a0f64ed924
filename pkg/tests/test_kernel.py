import numpy as np
import pytest
import scipy.linalg as la

from fastonl.graph import from_edges
from fastonl.kernel import (KernelOperator, KernelSpec, approximate_kernel_matrix, basic_kernel_matrix,
                            derive_alpha, exact_basic_kernel, exact_kernel_matrix, kernel_column,
                            kernel_inverse, kernel_transform, parse_lambda, residual_condition_norm,
                            spectral_norm)
from fastonl.push import KernelType
from fastonl.synthetic import random_graph


def specs_for(n, rng=None):
    """One valid spec per kernel id (two scalings for kernels 4 and 5)."""
    lam = 0.15 * n
    return [
        KernelSpec(1, lam),
        KernelSpec(2, lam),
        KernelSpec(3, lam, beta=0.9),
        KernelSpec(4, 2.0, beta=0.5),
        KernelSpec(4, 2.0, beta=0.5, s="D"),
        KernelSpec(5, 0.7, beta=0.3),
        KernelSpec(5, 0.7, beta=0.3, s="D"),
        KernelSpec(6, lam, beta=0.2, b=0.4),
    ]


def test_derive_alpha_table():
    assert derive_alpha(KernelSpec(2, 10.0), 10) == pytest.approx(0.5)
    assert derive_alpha(KernelSpec(3, 10.0, beta=1.0), 10) == pytest.approx(0.5)
    assert derive_alpha(KernelSpec(1, 10000 ** 0.5), 10000) == pytest.approx(0.01)
    assert derive_alpha(KernelSpec(4, 3.0, beta=0.5), 10) == pytest.approx(0.8)
    assert derive_alpha(KernelSpec(5, 3.0, beta=0.5), 10) == pytest.approx(6.0)
    assert derive_alpha(KernelSpec(6, 3.0, beta=0.5), 10) == pytest.approx(0.8)


def test_spec_validation():
    with pytest.raises(ValueError):
        derive_alpha(KernelSpec(3, 10.0, beta=2.0), 10)
    with pytest.raises(ValueError):
        KernelSpec(6, 1.0, beta=0.5, b=-1.0)
    with pytest.raises(ValueError):
        KernelSpec(4, 1.0)
    with pytest.raises(ValueError):
        KernelSpec(7, 1.0)
    assert KernelSpec("K2", 1.0).id == 2


def test_lambda_parsing():
    assert parse_lambda("0.15n", 200) == pytest.approx(30.0)
    assert parse_lambda("n", 7) == 7.0
    assert parse_lambda("2.5", None) == 2.5
    with pytest.raises(ValueError):
        parse_lambda("0.1n", None)


def test_spec_json_round_trip():
    spec = KernelSpec(6, 3.0, beta=0.5, b=0.1, s="I")
    assert KernelSpec.from_json(spec.to_json()) == spec
    assert KernelSpec.from_json({"id": "K2", "lambda": "0.5n"}, n=10).lam == 5.0


def test_single_node_kernel1():
    g = from_edges([], [], n=1)
    spec = KernelSpec(1, 0.5)
    alpha = derive_alpha(spec, 1)
    M = exact_kernel_matrix(g, spec)
    # empty Laplacian: the basic kernel is 1/alpha, so M = 2 lam / alpha = 2n
    assert M[0, 0] == pytest.approx(2 * spec.lam / alpha) == 2.0
    assert kernel_column(g, spec, 1e-9, 0).diag == pytest.approx(M[0, 0])


def test_kernel1_two_nodes_closed_form():
    g = from_edges([0], [1])
    spec = KernelSpec(1, 2.0)  # alpha = lam / n = 1
    col = kernel_column(g, spec, 1e-14, 0)
    np.testing.assert_allclose(col.to_dense(2), 2 * 2.0 * np.array([2 / 3, 1 / 3]), atol=1e-12)


def test_kernel2_regular_graph_cancels_scaling():
    n = 8
    g = from_edges(np.arange(n), (np.arange(n) + 1) % n)  # cycle
    spec = KernelSpec(2, 3.0)
    op = KernelOperator(g, spec, 1e-10)
    col = op.column(3)
    x = op.basic_column(3)
    np.testing.assert_allclose(col.to_dense(n), 2 * n * x.to_dense(n), rtol=1e-14)


def test_kernel6_without_rank_one_is_kernel1():
    g = random_graph(30, 0.2, 3)
    n, lam, beta = g.n, 4.0, 0.3
    k6 = kernel_column(g, KernelSpec(6, lam, beta=beta, b=0.0), 1e-10, 5)
    k1 = kernel_column(g, KernelSpec(1, (beta + lam / n) * n), 1e-10, 5)
    # same basic kernel; the scalar prefactor is 2 lam in both rows
    np.testing.assert_allclose(k6.to_dense(n) / (2 * lam), k1.to_dense(n) / (2 * (beta + lam / n) * n), rtol=1e-12)


def test_karate_column_matches_dense(karate_data):
    g, _ = karate_data
    spec = KernelSpec(2, 0.15 * g.n)
    M = exact_kernel_matrix(g, spec)
    op = KernelOperator(g, spec, 1e-14)
    for t in range(g.n):
        col = op.column(t)
        np.testing.assert_allclose(col.to_dense(g.n), M[:, t], atol=1e-6)
        assert col.diag == pytest.approx(M[t, t], abs=1e-6)


@pytest.mark.parametrize("idx", range(8))
def test_column_convergence_on_karate(karate_data, idx):
    g, _ = karate_data
    spec = specs_for(g.n)[idx]
    M = exact_kernel_matrix(g, spec)
    for t in (0, 11, 33):
        errs = [np.abs(kernel_column(g, spec, eps, t).to_dense(g.n) - M[:, t]).max()
                for eps in np.logspace(-1, -12, 12)]
        assert np.all(np.diff(errs) <= 1e-10)
        assert errs[-1] < 1e-6


def test_singleton_columns():
    g = from_edges([0, 1], [1, 2], n=4)
    for spec in specs_for(4):
        if spec.s == "D":
            with pytest.raises(ValueError):
                kernel_transform(g, spec)
            continue
        M = exact_kernel_matrix(g, spec)
        Ma, _ = approximate_kernel_matrix(g, spec, 1e-15)
        np.testing.assert_allclose(Ma, M, atol=1e-10)


@pytest.mark.parametrize("seed", range(20))
def test_decompositions_match_definition(seed):
    g = random_graph(int(np.random.default_rng(seed).integers(5, 60)), 0.15, seed, weighted=seed % 2 == 0)
    for spec in specs_for(g.n):
        M = exact_kernel_matrix(g, spec)
        X = exact_basic_kernel(g, spec)
        assert np.abs(kernel_transform(g, spec).dense(X, g) - M).max() <= 1e-8 * max(1.0, np.abs(M).max())


@pytest.mark.parametrize("seed", range(5))
def test_symmetry(seed):
    g = random_graph(40, 0.1, seed, weighted=True)
    for spec in specs_for(g.n):
        if spec.id in (1, 2, 5) or (spec.id == 6 and spec.s == "I"):
            M = exact_kernel_matrix(g, spec)
            assert np.abs(M - M.T).max() <= 1e-9 * max(1.0, np.abs(M).max())


@pytest.mark.parametrize("seed", range(20))
def test_spectral_envelopes(seed):
    g = random_graph(30, 0.2, seed, weighted=seed % 2 == 1)
    alpha = 0.05 + 0.9 * np.random.default_rng(seed).random()
    XL = basic_kernel_matrix(g, alpha, KernelType.TYPE_L)
    ev = np.linalg.eigvals(XL).real
    assert ev.min() >= alpha / (2 - alpha) - 1e-10 and ev.max() <= 1 + 1e-10
    a2 = 10 ** np.random.default_rng(seed + 99).uniform(-2, 1)
    XLap = basic_kernel_matrix(g, a2, KernelType.TYPE_LAP)
    ev = np.linalg.eigvalsh((XLap + XLap.T) / 2)
    assert ev.min() >= 1 / (a2 + 2 * g.D.max()) - 1e-10 and ev.max() <= 1 / a2 + 1e-10


@pytest.mark.parametrize("gamma", [0.2, 0.5, 0.8])
def test_trace_bound_kernel3(gamma):
    g = random_graph(80, 0.1, int(gamma * 10))
    n = g.n
    spec = KernelSpec(3, n ** gamma, beta=n ** (gamma - 1))
    assert np.trace(exact_kernel_matrix(g, spec)) <= 2 * n ** (1 + gamma)


def test_kernel_inverse_is_psd_or_pd(karate_data):
    g, _ = karate_data
    for spec in specs_for(g.n):
        K = kernel_inverse(g, spec)
        np.testing.assert_allclose(K, K.T, atol=1e-12)


def test_dense_cap(karate_data):
    g, _ = karate_data
    with pytest.raises(ValueError, match="limited"):
        exact_kernel_matrix(g, KernelSpec(2, 1.0), cap=10)


def test_residual_norm_zero_when_exact(karate_data):
    g, _ = karate_data
    assert residual_condition_norm(g, KernelSpec(2, 0.15 * g.n), 1e-300) == 0.0


def test_residual_norm_identity_when_inactive(karate_data):
    g, _ = karate_data
    assert residual_condition_norm(g, KernelSpec(2, 0.15 * g.n), 10.0) == pytest.approx(1.0, rel=1e-8)


def test_residual_norm_default_eps_on_karate(karate_data):
    g, _ = karate_data
    spec = KernelSpec(2, 0.15 * g.n)
    alpha = derive_alpha(spec, g.n)
    assert alpha == pytest.approx(0.15 / 1.15)
    value = residual_condition_norm(g, spec)
    _, R = approximate_kernel_matrix(g, spec)
    h = np.sqrt(g.D)
    assert value == pytest.approx(np.linalg.norm(R * h[None, :] / h[:, None], 2), rel=1e-6)
    assert value <= 1 / alpha


def test_spectral_norm_against_svd(rng):
    A = rng.standard_normal((12, 12))
    assert spectral_norm(A) == pytest.approx(la.svdvals(A)[0], rel=1e-6)
    with pytest.raises(RuntimeError, match="did not converge"):
        spectral_norm(A, tol=0.0, max_iter=3)
