"""Built-in invariant suite for `looise selftest`.

Each check is a small named assertion over seeded inputs: closed-form
LOO identities against brute-force refits, moment-matrix structure,
optimality and unbiasedness of the weighted estimators, limit
consistency, and the golden fixtures of the benchmark functions. The
whole suite runs in well under a minute.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import estimators, moments, numerics
from .designs import (
    Design,
    regular_grid,
    sobol_points,
    theta_from_coverage,
    uniform_measure,
)
from .kernels import FAMILIES, KernelSpec, correlation, kernel_eval, kernel_matrix
from .predictors import (
    BayesPolynomial,
    EmpiricalMean,
    OrdinaryKriging,
    SimpleKriging,
    loo_residuals_bruteforce,
    poly_basis,
)
from .testbed import environmental, piston4d, sample_gp

ENV_GOLDEN = (
    ((0.0, 0.0), 37.796447300922723),
    ((0.5, 0.5), 69.359294300337187),
    ((0.25, 0.75), 13.875124778028086),
    ((1.0, 1.0), 8.1505621104135033),
    ((0.7, 0.31), 3.8035562048905382),
)
PISTON_GOLDEN = (
    ((0.0, 0.0, 0.0, 0.0), 0.45925072960273603),
    ((1.0, 1.0, 1.0, 1.0), 0.44519003813534001),
    ((0.5, 0.5, 0.5, 0.5), 0.4643970224718025),
    ((0.2, 0.8, 0.4, 0.6), 0.32660359277852317),
    ((0.9, 0.1, 0.7, 0.3), 0.82216551056822579),
)

CHECKS = []


def check(name):
    def deco(fn):
        CHECKS.append((name, fn))
        return fn

    return deco


def _design(d=1, n=10, seed=0):
    return Design(points=sobol_points(d, n, scramble_seed=seed), provenance="sobol")


def _setup(seed=0, n=12, d=1, theta_p=6.0, theta_e=8.0):
    design = _design(d, n, seed)
    pred = SimpleKriging(KernelSpec("matern52", theta_p), design)
    measure = uniform_measure(sobol_points(d, 128, scramble_seed=seed + 50))
    kern = KernelSpec("matern32", theta_e)
    bundle = moments.build_bundle(pred.loo_operator(), pred, kern, design, measure)
    y = sample_gp(kern, design.points, 7, seed)
    return design, pred, measure, kern, bundle, y


@check("kernels: unit diagonal and nugget")
def _k1():
    for fam in FAMILIES:
        assert kernel_eval(KernelSpec(fam, 2.0), [0.3], [0.3]) == 1.0
    assert kernel_eval(KernelSpec("matern32", 2.0, 0.25), [0.3], [0.3]) == 1.25


@check("kernels: monotone decay")
def _k2():
    for fam in FAMILIES:
        vals = correlation(fam, np.linspace(0, 5, 40))
        assert np.all(np.diff(vals) <= 0)


@check("kernels: nugget adds identity exactly")
def _k3():
    pts = sobol_points(2, 9, scramble_seed=1)
    K0 = kernel_matrix(KernelSpec("gaussian", 4.0), pts)
    K1 = kernel_matrix(KernelSpec("gaussian", 4.0, 0.125), pts)
    assert np.array_equal(K1, K0 + 0.125 * np.eye(9))


@check("numerics: factorization reconstructs input")
def _n1():
    K = kernel_matrix(KernelSpec("matern32", 10.0), regular_grid(2, 6).points)
    F = numerics.spd_factorize(K)
    assert F.jitter_applied == 0.0
    assert np.linalg.norm(F.reconstruct() - K) <= 1e-10 * np.linalg.norm(K)


@check("numerics: solve round trip")
def _n2():
    K = kernel_matrix(KernelSpec("matern52", 5.0), sobol_points(1, 14, scramble_seed=2))
    F = numerics.spd_factorize(K)
    x = np.linspace(-1, 1, 14)
    assert np.linalg.norm(numerics.solve(F, K @ x) - x) <= 1e-8 * np.linalg.norm(x)


@check("numerics: bordered inverse consistency")
def _n3():
    K = kernel_matrix(KernelSpec("matern32", 4.0), sobol_points(1, 8, scramble_seed=3))
    Mbar = numerics.bordered_inverse(K)
    Kbar = np.block([[K, np.ones((8, 1))], [np.ones((1, 8)), np.zeros((1, 1))]])
    assert np.linalg.norm(Mbar @ Kbar - np.eye(9)) < 1e-9


@check("numerics: rank-one flat-limit matrix fails loudly")
def _n4():
    try:
        numerics.spd_factorize(np.ones((5, 5)))
    except Exception:
        return
    raise AssertionError("rank-one matrix must not factorize")


@check("loo: simple kriging matches brute force")
def _l1():
    design = _design(2, 12, 4)
    pred = SimpleKriging(KernelSpec("matern52", 6.0), design)
    y = sample_gp(KernelSpec("matern32", 7.0), design.points, 11)
    assert np.max(np.abs(pred.loo_residuals(y) - loo_residuals_bruteforce(pred, y))) < 1e-8


@check("loo: ordinary kriging matches brute force")
def _l2():
    design = _design(2, 11, 5)
    pred = OrdinaryKriging(KernelSpec("matern32", 5.0), design)
    y = sample_gp(KernelSpec("matern32", 7.0), design.points, 12)
    assert np.max(np.abs(pred.loo_residuals(y) - loo_residuals_bruteforce(pred, y))) < 1e-8


@check("loo: polynomial model matches brute force")
def _l3():
    design = _design(2, 13, 6)
    pred = BayesPolynomial(*poly_basis(2, 10, c=10.0), 0.05, design)
    y = sample_gp(KernelSpec("matern32", 7.0), design.points, 13)
    assert np.max(np.abs(pred.loo_residuals(y) - loo_residuals_bruteforce(pred, y))) < 1e-8


@check("loo: empirical mean matches brute force")
def _l4():
    design = _design(1, 9, 7)
    pred = EmpiricalMean(design)
    y = sample_gp(KernelSpec("matern32", 5.0), design.points, 14)
    assert np.max(np.abs(pred.loo_residuals(y) - loo_residuals_bruteforce(pred, y))) < 1e-8


@check("loo: deleted-point variance identity")
def _l5():
    design = _design(1, 10, 8)
    kern = KernelSpec("matern52", 7.0)
    pred = SimpleKriging(kern, design)
    K = kernel_matrix(kern, design.points)
    R = pred.loo_operator().matrix
    M = np.linalg.inv(K)
    assert np.max(np.abs(np.diag(R.T @ K @ R) - 1.0 / np.diag(M))) < 1e-9


@check("loo: sum-to-one operators annihilate constants")
def _l6():
    design = _design(2, 10, 9)
    for pred in (OrdinaryKriging(KernelSpec("matern32", 6.0), design),
                 EmpiricalMean(design)):
        assert np.max(np.abs(pred.loo_operator().matrix.T @ np.ones(10))) < 1e-10


@check("predictors: interpolation at design points")
def _p1():
    design = _design(2, 9, 10)
    pred = SimpleKriging(KernelSpec("matern52", 5.0), design)
    W = pred.weights_matrix(design.points)
    assert np.max(np.abs(W - np.eye(9))) < 1e-7


@check("predictors: ordinary kriging weights sum to one")
def _p2():
    design = _design(2, 12, 11)
    pred = OrdinaryKriging(KernelSpec("matern32", 7.0), design)
    W = pred.weights_matrix(sobol_points(2, 30, scramble_seed=12))
    assert np.max(np.abs(W.sum(axis=1) - 1.0)) < 1e-10


@check("moments: matched-kernel prediction variance")
def _m1():
    design, pred, measure, kern, bundle, y = _setup(12)
    sk = SimpleKriging(kern, design)
    x = measure.points[13]
    K = kernel_matrix(kern, design.points)
    k = np.atleast_2d(x)
    from .kernels import cross_matrix

    kx = cross_matrix(kern, design.points, k)[0]
    assert abs(moments.rho2(sk.weights(x), kern, design, x)
               - (1.0 - kx @ np.linalg.solve(K, kx))) < 1e-10


@check("moments: t vanishes for the matched predictor")
def _m2():
    design, pred, measure, kern, bundle, y = _setup(13)
    sk = SimpleKriging(kern, design)
    x = measure.points[7]
    assert np.max(np.abs(moments.t_vector(sk.weights(x), kern, design, x))) < 1e-10


@check("moments: S minus u u^T is positive semidefinite")
def _m3():
    _, _, _, _, bundle, _ = _setup(14)
    gap = bundle.S - np.outer(bundle.u, bundle.u)
    assert np.linalg.eigvalsh(gap).min() >= -1e-10 * np.linalg.norm(bundle.S)


@check("moments: matched simple kriging has b = J u")
def _m4():
    design = _design(1, 10, 15)
    kern = KernelSpec("matern52", 7.0)
    pred = SimpleKriging(kern, design)
    measure = uniform_measure(sobol_points(1, 128, scramble_seed=16))
    bundle = moments.build_bundle(pred.loo_operator(), pred, kern, design, measure)
    assert np.max(np.abs(bundle.b - bundle.J * bundle.u)) < 1e-10 * bundle.J


@check("moments: interpolator cross moments vanish on the design")
def _m5():
    design, pred, measure, kern, bundle, _ = _setup(17)
    c_rows, _ = moments.pointwise_c_rho(bundle, design.points)
    assert np.max(np.abs(c_rows)) < 1e-9


@check("moments: independent limit matches a huge range")
def _m6():
    design = regular_grid(2, 4)
    pred = SimpleKriging(KernelSpec("matern52", 4.0), design)
    measure = uniform_measure(sobol_points(2, 128, scramble_seed=18))
    R = pred.loo_operator()
    big = moments.build_bundle(R, pred, KernelSpec("matern32", 1e6), design, measure)
    lim = moments.independent_limit_bundle(R, pred, design, measure)
    for field in ("u", "S", "b"):
        a, b = getattr(big, field), getattr(lim, field)
        assert np.linalg.norm(a - b) <= 1e-3 * np.linalg.norm(b)
    assert abs(big.J - lim.J) <= 1e-3 * abs(lim.J)


@check("moments: flat-limit diagnostics classify predictors")
def _m7():
    design = _design(2, 10, 19)
    measure = uniform_measure(sobol_points(2, 64, scramble_seed=20))
    ok = OrdinaryKriging(KernelSpec("matern32", 6.0), design)
    assert moments.flat_limit_diagnostics(ok.loo_operator(), ok, measure)["sum_to_one_class"]
    sk = SimpleKriging(KernelSpec("matern52", 6.0), design)
    assert moments.flat_limit_diagnostics(sk.loo_operator(), sk, measure)["rank_one_S0"]


@check("estimators: weighted estimate clamps at zero")
def _e1():
    _, pred, _, _, bundle, y = _setup(21)
    eps = pred.loo_residuals(y)
    assert estimators.ise_blp(bundle, eps, clamp=True).value >= 0.0
    assert estimators.ise_blp(bundle, np.zeros_like(eps)).value == 0.0


@check("estimators: unbiasedness constraint holds exactly")
def _e2():
    _, _, _, _, bundle, _ = _setup(22)
    gamma = estimators.blup_weights(bundle)
    assert abs(gamma @ bundle.u - bundle.J) < 1e-10 * bundle.J


@check("estimators: optimal weights beat the unweighted mean")
def _e3():
    _, _, _, _, bundle, _ = _setup(23)
    n = bundle.n
    mse_blp = estimators.performance_report(bundle.solve_S(bundle.b), bundle).mse
    mse_loo = estimators.performance_report(np.full(n, 1.0 / n), bundle).mse
    assert mse_blp <= mse_loo + 1e-9 * abs(mse_loo)


@check("estimators: oracle weights dominate misspecified ones")
def _e4():
    design, pred, measure, kern, bundle_true, _ = _setup(24)
    bundle_e = moments.build_bundle(bundle_true.R, pred, KernelSpec("matern32", 2.0),
                                    design, measure)
    rec = estimators.estimator_dominance_check(bundle_e, bundle_true)
    scale = max(abs(rec["mse_blp"]), abs(rec["mse_loo"]))
    assert rec["gap_oracle"] >= -1e-9 * scale
    assert rec["gap_loo_oracle"] >= -1e-9 * scale


@check("estimators: matched weighted estimator is negatively biased")
def _e5():
    design = _design(1, 11, 25)
    kern = KernelSpec("matern32", 8.0)
    pred = SimpleKriging(kern, design)
    measure = uniform_measure(sobol_points(1, 128, scramble_seed=26))
    bundle = moments.build_bundle(pred.loo_operator(), pred, kern, design, measure)
    rep = estimators.performance_report(bundle.solve_S(bundle.b), bundle)
    assert rep.bias < 0


@check("estimators: translation invariance for sum-to-one predictors")
def _e6():
    design = _design(2, 10, 27)
    pred = OrdinaryKriging(KernelSpec("matern32", 6.0), design)
    measure = uniform_measure(sobol_points(2, 64, scramble_seed=28))
    bundle = moments.build_bundle(pred.loo_operator(), pred,
                                  KernelSpec("matern52", 7.0), design, measure)
    y = sample_gp(KernelSpec("matern32", 6.0), design.points, 29)
    a = estimators.ise_blp(bundle, pred.loo_residuals(y)).value
    b = estimators.ise_blp(bundle, pred.loo_residuals(y + 3.25)).value
    assert abs(a - b) <= 1e-14 * max(1.0, abs(a))


@check("estimators: scale equivariance")
def _e7():
    _, pred, _, _, bundle, y = _setup(30)
    eps = pred.loo_residuals(y)
    assert estimators.ise_blp(bundle, 2 * eps).value == 4 * estimators.ise_blp(bundle, eps).value
    assert estimators.ise_loo(2 * eps).value == 4 * estimators.ise_loo(eps).value


@check("estimators: trend correction is a no-op for ordinary kriging")
def _e8():
    design = _design(2, 11, 31)
    pred = OrdinaryKriging(KernelSpec("matern32", 5.0), design)
    measure = uniform_measure(sobol_points(2, 64, scramble_seed=32))
    kern = KernelSpec("matern52", 6.0)
    y = sample_gp(KernelSpec("matern32", 5.0), design.points, 33) + 5.0
    bundle = moments.build_bundle(pred.loo_operator(), pred, kern, design, measure)
    est = estimators.trend_corrected_ise(y, pred, kern, measure, bundle=bundle)
    plain = estimators.ise_blp(bundle, pred.loo_residuals(y))
    assert abs(est.value - plain.value) <= 1e-10 * max(1.0, plain.value)


@check("estimators: tail statistics conventions")
def _e9():
    out = estimators.tail_stats([1.0, 2.0, 3.0, 4.0], 0.5)
    assert out["quantile"] == 2.0 and out["cvar"] == 3.0 and out["unreliable"]


@check("designs: coverage rule round trip")
def _d1():
    for fam in ("matern52", "inverse-multiquadric", "gaussian"):
        theta = theta_from_coverage(fam, 0.31, 0.25)
        assert abs(float(correlation(fam, theta * 0.31)) - 0.25) < 1e-9


@check("designs: unscrambled sequence starts at the origin")
def _d2():
    pts = sobol_points(2, 4)
    assert np.array_equal(pts[0], [0.0, 0.0])
    assert np.array_equal(sobol_points(1, 4).ravel(), [0.0, 0.5, 0.75, 0.25])


@check("fixtures: environmental model golden values")
def _f1():
    for x, expected in ENV_GOLDEN:
        assert math.isclose(environmental(x), expected, rel_tol=1e-12)


@check("fixtures: piston model golden values")
def _f2():
    for x, expected in PISTON_GOLDEN:
        assert math.isclose(piston4d(x), expected, rel_tol=1e-12)


def run_selftest(verbose: bool = True) -> bool:
    start = time.time()
    failures = []
    for name, fn in CHECKS:
        try:
            fn()
            status = "pass"
        except Exception as exc:  # noqa: BLE001 - report and continue
            failures.append((name, exc))
            status = f"FAIL ({type(exc).__name__}: {exc})"
        if verbose:
            print(f"[{status:4s}] {name}" if status == "pass" else f"[FAIL] {name}: {status}")
    elapsed = time.time() - start
    if verbose:
        print(f"{len(CHECKS) - len(failures)}/{len(CHECKS)} checks passed "
              f"in {elapsed:.1f}s")
    return not failures
