import numpy as np
import pytest

from conftest import random_design, small_measure
from looise.designs import Design, regular_grid, uniform_measure
from looise.errors import FlatLimitSingular, WeightSimplexViolation
from looise.kernels import KernelSpec, cross_matrix, kernel_matrix
from looise.moments import (
    build_bundle,
    flat_limit_diagnostics,
    independent_limit_bundle,
    mixture_bundle,
    pointwise_c_rho,
    rho2,
    rho2_cross,
    t_vector,
)
from looise.predictors import EmpiricalMean, OrdinaryKriging, SimpleKriging
from looise.rng import stream


def test_rho2_interpolator_zero_at_design():
    design = random_design(2, 10, seed=1)
    kern = KernelSpec("matern52", 6.0)
    p = SimpleKriging(kern, design)
    x = design.points[3]
    assert abs(rho2(p.weights(x), kern, design, x)) < 1e-9


def test_rho2_zero_weights():
    design = random_design(1, 5, seed=2)
    kern = KernelSpec("matern32", 4.0, nugget=0.25)
    assert np.isclose(rho2(np.zeros(5), kern, design, [0.37]), 1.25)


def test_rho2_matches_kriging_variance():
    design = random_design(1, 8, seed=3)
    kern = KernelSpec("gaussian", 5.0)
    p = SimpleKriging(kern, design)
    x = np.array([0.41])
    K = kernel_matrix(kern, design.points)
    k = cross_matrix(kern, design.points, x[None, :])[0]
    expected = 1.0 - k @ np.linalg.solve(K, k)
    assert np.isclose(rho2(p.weights(x), kern, design, x), expected, atol=1e-10)


def test_rho2_cross_diagonal_consistency():
    design = random_design(2, 7, seed=4)
    kern = KernelSpec("matern32", 5.0)
    p = EmpiricalMean(design)
    x = np.array([0.3, 0.8])
    w = p.weights(x)
    assert np.isclose(rho2_cross(w, w, kern, design, x, x),
                      rho2(w, kern, design, x), rtol=1e-12)


def test_rho2_cross_zero_at_design_for_interpolator():
    design = random_design(2, 9, seed=5)
    kern = KernelSpec("matern52", 7.0)
    p = SimpleKriging(kern, design)
    xi = design.points[2]
    x2 = np.array([0.9, 0.1])
    assert abs(rho2_cross(p.weights(xi), p.weights(x2), kern, design, xi, x2)) < 1e-8


def test_rho2_cross_monte_carlo():
    design = Design(points=np.linspace(0, 1, 6)[:, None])
    kern = KernelSpec("matern32", 5.0)
    p = SimpleKriging(KernelSpec("matern52", 8.0), design)
    x1, x2 = np.array([0.22]), np.array([0.67])
    w1, w2 = p.weights(x1), p.weights(x2)
    expected = rho2_cross(w1, w2, kern, design, x1, x2)
    joint = np.vstack([design.points, x1[None, :], x2[None, :]])
    L = np.linalg.cholesky(kernel_matrix(kern, joint) + 1e-12 * np.eye(8))
    Y = stream(55).standard_normal((40000, 8)) @ L.T
    e1 = Y[:, 6] - Y[:, :6] @ w1
    e2 = Y[:, 7] - Y[:, :6] @ w2
    prod = e1 * e2
    se = prod.std() / np.sqrt(len(prod))
    assert abs(prod.mean() - expected) <= 3 * se


def test_t_vector_examples():
    design = random_design(1, 6, seed=6)
    kern = KernelSpec("matern32", 8.0)
    p = SimpleKriging(kern, design)
    x = np.array([0.55])
    assert np.max(np.abs(t_vector(p.weights(x), kern, design, x))) < 1e-10
    K = kernel_matrix(kern, design.points)
    k = cross_matrix(kern, design.points, x[None, :])[0]
    assert np.allclose(t_vector(np.zeros(6), kern, design, x), k)
    w_mean = np.full(6, 1.0 / 6)
    assert np.allclose(t_vector(w_mean, kern, design, x), k - K @ np.ones(6) / 6)


def test_bundle_simple_kriging_structure():
    # matched model: c(x) = u * rho*^2(x), b = J u, S = u u^T + 2 D^2 M^2 D^2
    design = random_design(1, 9, seed=7)
    kern = KernelSpec("matern52", 9.0)
    p = SimpleKriging(kern, design)
    measure = small_measure(1, 128, seed=1)
    bundle = build_bundle(p.loo_operator(), p, kern, design, measure)
    assert np.allclose(bundle.b, bundle.J * bundle.u, rtol=1e-10)
    M = np.linalg.inv(kernel_matrix(kern, design.points))
    D = np.diag(1.0 / np.diag(M))
    S_star = np.outer(bundle.u, bundle.u) + 2.0 * (D @ M @ D) ** 2
    assert np.allclose(bundle.S, S_star, atol=1e-10 * np.abs(S_star).max())
    x = measure.points[17]
    c_rows, rho = pointwise_c_rho(bundle, x[None, :])
    assert np.allclose(c_rows[0], rho[0] * bundle.u, atol=1e-12)


def test_bundle_identity_case():
    # R = I, K ~ I (huge range): u = 1, S = 1 1^T + 2 I
    design = random_design(2, 6, seed=8)
    kern = KernelSpec("gaussian", 1e8)
    measure = small_measure(2, 64, seed=2)
    bundle = build_bundle(np.eye(6), lambda X: np.zeros((len(X), 6)), kern, design, measure)
    assert np.allclose(bundle.u, 1.0)
    assert np.allclose(bundle.S, np.ones((6, 6)) + 2.0 * np.eye(6))
    assert np.isclose(bundle.J, 1.0)  # J = K(x,x) for zero weights


def test_bundle_interpolator_c_zero_at_design_points():
    design = regular_grid(2, 4)
    kern = KernelSpec("matern32", 6.0)
    p = SimpleKriging(KernelSpec("matern52", 4.0), design)
    measure = small_measure(2, 64, seed=3)
    bundle = build_bundle(p.loo_operator(), p, kern, design, measure)
    c_rows, _ = pointwise_c_rho(bundle, design.points)
    assert np.max(np.abs(c_rows)) < 1e-9


def test_bundle_psd_gap():
    design = random_design(2, 12, seed=9)
    p = OrdinaryKriging(KernelSpec("matern32", 5.0), design)
    measure = small_measure(2, 128, seed=4)
    bundle = build_bundle(p.loo_operator(), p, KernelSpec("matern52", 8.0),
                          design, measure)
    gap = bundle.S - np.outer(bundle.u, bundle.u)
    assert np.linalg.eigvalsh(gap).min() >= -1e-10 * np.linalg.norm(bundle.S)


def test_bundle_b_matches_streamed_c():
    design = random_design(1, 8, seed=10)
    p = SimpleKriging(KernelSpec("matern32", 6.0), design)
    measure = small_measure(1, 100, seed=5)
    kern = KernelSpec("matern32", 9.0)
    bundle = build_bundle(p.loo_operator(), p, kern, design, measure)
    c_rows, rho = pointwise_c_rho(bundle, measure.points)
    assert np.allclose(measure.weights @ c_rows, bundle.b, rtol=1e-13)
    assert np.isclose(measure.weights @ rho, bundle.J, rtol=1e-13)


def test_monte_carlo_moments_smallscale():
    # 2e4-draw sanity check of u, S and c against empirical fourth moments
    design = Design(points=np.linspace(0, 1, 8)[:, None])
    kern = KernelSpec("matern32", 6.0)
    p = SimpleKriging(KernelSpec("matern52", 9.0), design)
    measure = uniform_measure(np.array([[0.23], [0.71]]))
    bundle = build_bundle(p.loo_operator(), p, kern, design, measure, compute_Vn=True)

    ndraw = 20000
    joint = np.vstack([design.points, measure.points])
    L = np.linalg.cholesky(kernel_matrix(kern, joint) + 1e-12 * np.eye(10))
    z = stream(99).standard_normal((ndraw, 10))
    Y = z @ L.T
    yn, fx = Y[:, :8], Y[:, 8:]
    eps_loo = yn @ bundle.R
    eps_sq = eps_loo**2
    u_emp = eps_sq.mean(axis=0)
    se_u = eps_sq.std(axis=0) / np.sqrt(ndraw)
    assert np.all(np.abs(u_emp - bundle.u) <= 4 * se_u)
    prods = eps_sq[:, :, None] * eps_sq[:, None, :]
    S_emp = prods.mean(axis=0)
    se_S = prods.std(axis=0) / np.sqrt(ndraw)
    assert np.all(np.abs(S_emp - bundle.S) <= 4 * se_S + 1e-12)
    errs = (fx - yn @ p.weights_matrix(measure.points).T) ** 2
    c_rows, _ = pointwise_c_rho(bundle, measure.points)
    for j in range(2):
        prod = errs[:, j : j + 1] * eps_sq
        c_emp = prod.mean(axis=0)
        se_c = prod.std(axis=0) / np.sqrt(ndraw)
        assert np.all(np.abs(c_emp - c_rows[j]) <= 4 * se_c + 1e-12)


def test_independent_limit_consistency():
    design = regular_grid(2, 5)
    p = SimpleKriging(KernelSpec("matern52", 4.0), design)
    measure = small_measure(2, 256, seed=6)
    R = p.loo_operator()
    big = build_bundle(R, p, KernelSpec("matern32", 1e6), design, measure)
    lim = independent_limit_bundle(R, p, design, measure)
    for field in ("u", "S", "b"):
        a, b = getattr(big, field), getattr(lim, field)
        assert np.linalg.norm(a - b) <= 1e-3 * np.linalg.norm(b)
    assert abs(big.J - lim.J) <= 1e-3 * abs(lim.J)


def test_independent_limit_zero_weights():
    design = random_design(1, 5, seed=11)
    measure = small_measure(1, 64, seed=7)
    lim = independent_limit_bundle(np.eye(5), lambda X: np.zeros((len(X), 5)),
                                   design, measure)
    assert np.isclose(lim.J, 1.0)


def test_flat_limit_diagnostics():
    design = random_design(2, 10, seed=12)
    measure = small_measure(2, 128, seed=8)
    ok = OrdinaryKriging(KernelSpec("matern32", 5.0), design)
    diag = flat_limit_diagnostics(ok.loo_operator(), ok, measure)
    assert diag["J0"] < 1e-12 and np.max(diag["u0"]) < 1e-12
    assert diag["sum_to_one_class"] and not diag["rank_one_S0"]

    em = EmpiricalMean(design)
    diag = flat_limit_diagnostics(em.loo_operator(), em, measure)
    assert diag["J0"] < 1e-12

    sk = SimpleKriging(KernelSpec("matern52", 6.0), design)
    diag = flat_limit_diagnostics(sk.loo_operator(), sk, measure)
    assert diag["rank_one_S0"] and not diag["sum_to_one_class"]
    assert np.allclose(diag["b0"], 3.0 * diag["J0"] * diag["u0"])


def test_flat_limit_singular_raised():
    # tiny assumed range on a non-sum-to-one predictor degenerates S
    design = random_design(1, 10, seed=13)
    p = SimpleKriging(KernelSpec("matern52", 8.0), design)
    measure = small_measure(1, 64, seed=9)
    with pytest.raises(FlatLimitSingular):
        build_bundle(p.loo_operator(), p, KernelSpec("gaussian", 1e-5), design, measure)


def test_vn_loop_order_invariance():
    design = random_design(1, 6, seed=14)
    p = SimpleKriging(KernelSpec("matern32", 7.0), design)
    measure = small_measure(1, 100, seed=10)
    kern = KernelSpec("matern32", 5.0)
    bundle = build_bundle(p.loo_operator(), p, kern, design, measure, compute_Vn=True)
    # direct double loop in the transposed order
    W = p.weights_matrix(measure.points)
    total = 0.0
    for jdx in range(measure.size):
        for idx in range(measure.size):
            val = rho2_cross(W[idx], W[jdx], kern, design,
                             measure.points[idx], measure.points[jdx])
            total += measure.weights[idx] * measure.weights[jdx] * val**2
    assert np.isclose(total, bundle.V, rtol=1e-10)


def test_mixture_bundle_reductions():
    design = random_design(2, 8, seed=15)
    p = OrdinaryKriging(KernelSpec("matern32", 6.0), design)
    measure = small_measure(2, 64, seed=11)
    R = p.loo_operator()
    k1 = KernelSpec("matern32", 5.0)
    k2 = KernelSpec("gaussian", 9.0)
    single = build_bundle(R, p, k1, design, measure, compute_Vn=True)
    m1 = mixture_bundle([k1], [1.0], R, p, design, measure, compute_Vn=True)
    m10 = mixture_bundle([k1, k2], [1.0, 0.0], R, p, design, measure, compute_Vn=True)
    for m in (m1, m10):
        assert np.allclose(m.u, single.u)
        assert np.allclose(m.S, single.S)
        assert np.allclose(m.b, single.b)
        assert np.isclose(m.J, single.J)
        assert np.isclose(m.V, single.V)
    with pytest.raises(WeightSimplexViolation):
        mixture_bundle([k1, k2], [0.7, 0.6], R, p, design, measure)
    with pytest.raises(WeightSimplexViolation):
        mixture_bundle([k1, k2], [1.5, -0.5], R, p, design, measure)


def test_mixture_bundle_monte_carlo():
    # hierarchical draws: pick component, then a GP sample from it
    design = Design(points=np.linspace(0, 1, 7)[:, None])
    p = SimpleKriging(KernelSpec("matern52", 8.0), design)
    measure = uniform_measure(np.array([[0.33]]))
    k1, k2 = KernelSpec("matern32", 3.0), KernelSpec("gaussian", 12.0)
    nu = [0.4, 0.6]
    R = p.loo_operator()
    bundle = mixture_bundle([k1, k2], nu, R, p, design, measure)

    ndraw = 60000
    gen = stream(7)
    joint = np.vstack([design.points, measure.points])
    Ls = [np.linalg.cholesky(kernel_matrix(k, joint) + 1e-12 * np.eye(8)) for k in (k1, k2)]
    picks = gen.choice(2, size=ndraw, p=nu)
    z = gen.standard_normal((ndraw, 8))
    Y = np.where((picks == 0)[:, None], z @ Ls[0].T, z @ Ls[1].T)
    eps_sq = (Y[:, :7] @ bundle.R) ** 2
    S_emp = (eps_sq[:, :, None] * eps_sq[:, None, :]).mean(axis=0)
    se = (eps_sq[:, :, None] * eps_sq[:, None, :]).std(axis=0) / np.sqrt(ndraw)
    assert np.all(np.abs(S_emp - bundle.S) <= 4 * se + 1e-12)
