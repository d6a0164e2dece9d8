"""Gaussian moments of prediction errors and squared LOO residuals.

Everything here is normalized by the process variance: the assumed
model only enters through its correlation kernel, so no variance
estimate is ever required. A :class:`MomentBundle` collects, for one
assumed kernel (or a finite mixture of kernels, or the independent
limit), the first two moments of the squared LOO residual vector
(u and S), their cross moments with the integrated squared error
(b and J), and optionally the second moment V of the ISE itself.

Integration against the measure is streamed in blocks: per-point
cross-moment vectors c(x) are accumulated into b without materializing
the (support size) x n array.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .designs import Design, IntegrationMeasure
from .errors import (
    DimensionMismatch,
    FlatLimitSingular,
    LooiseError,
    NotPositiveDefinite,
    WeightSimplexViolation,
)
from .kernels import KernelSpec, cross_matrix, kernel_eval, kernel_matrix

BLOCK = 4096


class WeightSource:
    """Uniform access to predictor weights over the measure support.

    Accepts a LinearPredictor, a callable X -> (m, n) array, or a
    precomputed (N, n) array aligned with the support. Array-backed
    sources can only be evaluated on support points.
    """

    def __init__(self, source, measure: IntegrationMeasure, n: int):
        self._measure = measure
        self._n = n
        self._array = None
        self._fn = None
        if hasattr(source, "weights_matrix"):
            self._fn = source.weights_matrix
        elif callable(source):
            self._fn = source
        else:
            arr = np.asarray(source, dtype=float)
            if arr.shape != (measure.size, n):
                raise DimensionMismatch(
                    f"weight table has shape {arr.shape}, expected ({measure.size}, {n})"
                )
            self._array = arr
            self._index = None

    def block(self, lo: int, hi: int) -> np.ndarray:
        if self._array is not None:
            return self._array[lo:hi]
        return np.asarray(self._fn(self._measure.points[lo:hi]), dtype=float)

    def at(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if self._array is not None:
            if self._index is None:
                self._index = {p.tobytes(): i for i, p in enumerate(self._measure.points)}
            try:
                rows = [self._index[p.tobytes()] for p in X]
            except KeyError:
                raise LooiseError("array-backed weights can only be evaluated on the support")
            return self._array[rows]
        return np.asarray(self._fn(X), dtype=float)

    def full(self) -> np.ndarray:
        if self._array is not None:
            return self._array
        return self.at(self._measure.points)


@dataclass(frozen=True)
class Component:
    """One kernel of the assumed model; kernel None denotes the independent limit."""

    nu: float
    kernel: KernelSpec | None
    u: np.ndarray
    rkr_sq: np.ndarray  # (R^T K R)^{o2}, the variance kernel of eps_loo^{o2}


@dataclass
class MomentBundle:
    u: np.ndarray
    S: np.ndarray
    b: np.ndarray
    J: float
    V: float | None
    R: np.ndarray
    design: Design
    measure: IntegrationMeasure
    components: list[Component]
    weights: WeightSource
    sum_to_one_defect: float  # integral of (1 - w(x)^T 1)^2 against the measure
    S_fact: numerics.SpdFactorization = field(default=None, repr=False)

    def __post_init__(self):
        if self.S_fact is None:
            try:
                self.S_fact = numerics.spd_factorize(self.S)
            except NotPositiveDefinite as exc:
                raise FlatLimitSingular(
                    "S is numerically singular; the assumed kernel is too close "
                    "to its flat limit for this predictor"
                ) from exc

    @property
    def n(self) -> int:
        return len(self.u)

    def solve_S(self, rhs) -> np.ndarray:
        return numerics.solve(self.S_fact, rhs)

    @property
    def vn_included(self) -> bool:
        return self.V is not None


def rho2(w, kernel: KernelSpec, design: Design, x) -> float:
    """Normalized expected squared prediction error at x for weights w."""
    w = np.asarray(w, dtype=float)
    k = cross_matrix(kernel, design.points, np.atleast_2d(np.asarray(x, float)))[0]
    K = kernel_matrix(kernel, design.points)
    return float(kernel_eval(kernel, x, x) - 2.0 * w @ k + w @ K @ w)


def rho2_cross(w1, w2, kernel: KernelSpec, design: Design, x1, x2) -> float:
    """Normalized covariance of the prediction errors at x1 and x2."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    k1 = cross_matrix(kernel, design.points, np.atleast_2d(np.asarray(x1, float)))[0]
    k2 = cross_matrix(kernel, design.points, np.atleast_2d(np.asarray(x2, float)))[0]
    K = kernel_matrix(kernel, design.points)
    return float(kernel_eval(kernel, x1, x2) - w1 @ k2 - w2 @ k1 + w1 @ K @ w2)


def t_vector(w, kernel: KernelSpec, design: Design, x) -> np.ndarray:
    """Normalized cross-moments E{y eps(x)}: k(x) - K w(x)."""
    w = np.asarray(w, dtype=float)
    k = cross_matrix(kernel, design.points, np.atleast_2d(np.asarray(x, float)))[0]
    K = kernel_matrix(kernel, design.points)
    return k - K @ w


def _loo_matrix(R) -> np.ndarray:
    return R.matrix if hasattr(R, "matrix") else np.asarray(R, dtype=float)


def _component_for(kernel: KernelSpec | None, nu: float, R: np.ndarray,
                   design: Design) -> Component:
    if kernel is None:
        A = R.T @ R
    else:
        A = R.T @ kernel_matrix(kernel, design.points) @ R
    return Component(nu=nu, kernel=kernel, u=np.diag(A).copy(), rkr_sq=A * A)


def _block_rho2_and_G(comp: Component, W: np.ndarray, X: np.ndarray,
                      design: Design, R: np.ndarray):
    """Per-block rho^2 values and G = (R^T t(x))^T rows for one component."""
    if comp.kernel is None:
        rho = 1.0 + np.sum(W * W, axis=1)
        G = W @ R
        return rho, G
    K = kernel_matrix(comp.kernel, design.points)
    C = cross_matrix(comp.kernel, design.points, X)
    KW = W @ K
    rho = (1.0 + comp.kernel.nugget) - 2.0 * np.sum(W * C, axis=1) + np.sum(KW * W, axis=1)
    G = (C - KW) @ R
    return rho, G


def pointwise_c_rho(bundle: MomentBundle, X, W=None):
    """Rows of the mixture c(x) and the mixture rho^2(x) at the given points."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if W is None:
        W = bundle.weights.at(X)
    C_rows = np.zeros((len(X), bundle.n))
    rho_mix = np.zeros(len(X))
    for comp in bundle.components:
        rho, G = _block_rho2_and_G(comp, W, X, bundle.design, bundle.R)
        C_rows += comp.nu * (rho[:, None] * comp.u[None, :] + 2.0 * G * G)
        rho_mix += comp.nu * rho
    return C_rows, rho_mix


def _vn_component(kernel: KernelSpec | None, W: np.ndarray, design: Design,
                  measure: IntegrationMeasure, block: int = 512) -> float:
    """Double integral of rho^4(x, x') against the measure, for one kernel."""
    pts = measure.points
    mu = measure.weights
    if kernel is None:
        # limit case: rho2_cross(x,x') = w(x)^T w(x') off the diagonal, 1 + ||w||^2 on it
        cross_base = W @ W.T
        diag = 1.0 + np.sum(W * W, axis=1)
        sq = cross_base * cross_base
        np.fill_diagonal(sq, diag * diag)
        return float(mu @ sq @ mu)
    K = kernel_matrix(kernel, design.points)
    C = cross_matrix(kernel, design.points, pts)
    P = W @ K
    total = 0.0
    for lo in range(0, len(pts), block):
        hi = min(lo + block, len(pts))
        Kxx = cross_matrix(kernel, pts, pts[lo:hi])
        if kernel.nugget:
            for r in range(lo, hi):
                Kxx[r - lo, r] += kernel.nugget
        cross = Kxx - W[lo:hi] @ C.T - C[lo:hi] @ W.T + P[lo:hi] @ W.T
        total += float(mu[lo:hi] @ (cross * cross) @ mu)
    return total


def _assemble(components, R, weights, design: Design, measure: IntegrationMeasure,
              compute_Vn: bool, block: int = BLOCK) -> MomentBundle:
    n = design.n
    u = np.zeros(n)
    S = np.zeros((n, n))
    for comp in components:
        u += comp.nu * comp.u
        S += comp.nu * (np.outer(comp.u, comp.u) + 2.0 * comp.rkr_sq)
    S = 0.5 * (S + S.T)

    b = np.zeros(n)
    J = 0.0
    defect = 0.0
    pts = measure.points
    mu = measure.weights
    for lo in range(0, measure.size, block):
        hi = min(lo + block, measure.size)
        W = weights.block(lo, hi)
        X = pts[lo:hi]
        wts = mu[lo:hi]
        defect += float(wts @ (1.0 - W.sum(axis=1)) ** 2)
        for comp in components:
            rho, G = _block_rho2_and_G(comp, W, X, design, R)
            c_rows = rho[:, None] * comp.u[None, :] + 2.0 * G * G
            b += comp.nu * (wts @ c_rows)
            J += comp.nu * float(wts @ rho)

    V = None
    if compute_Vn:
        W_full = weights.full()
        V = sum(
            comp.nu * _vn_component(comp.kernel, W_full, design, measure)
            for comp in components
        )
    return MomentBundle(u=u, S=S, b=b, J=J, V=V, R=R, design=design, measure=measure,
                        components=list(components), weights=weights,
                        sum_to_one_defect=defect)


def build_bundle(R, weights, kernel_e: KernelSpec, design: Design,
                 measure: IntegrationMeasure, compute_Vn: bool = False,
                 block: int = BLOCK) -> MomentBundle:
    """Moment bundle for a single assumed kernel.

    `R` is the LOO operator (or its raw matrix), `weights` the predictor
    weights over the measure support (predictor, callable or array).
    """
    R = _loo_matrix(R)
    ws = weights if isinstance(weights, WeightSource) else WeightSource(weights, measure, design.n)
    comp = _component_for(kernel_e, 1.0, R, design)
    return _assemble([comp], R, ws, design, measure, compute_Vn, block)


def mixture_components(kernels, nu, R, design: Design) -> list[Component]:
    nu = np.asarray(nu, dtype=float)
    if len(nu) != len(kernels):
        raise DimensionMismatch("one weight per kernel required")
    if (nu < 0).any() or abs(nu.sum() - 1.0) > 1e-12:
        raise WeightSimplexViolation("mixture weights must be nonnegative and sum to 1")
    return [_component_for(k, float(w), R, design) for k, w in zip(kernels, nu)]


def mixture_bundle(kernels, nu, R, weights, design: Design,
                   measure: IntegrationMeasure, compute_Vn: bool = False,
                   block: int = BLOCK) -> MomentBundle:
    """Moment bundle under a finite mixture of GP kernels.

    Every expectation decomposes componentwise (the mixture of Gaussians
    is not Gaussian, so S is the mixture of the per-kernel fourth-moment
    matrices, not the fourth-moment matrix of a mixed kernel).
    """
    R = _loo_matrix(R)
    ws = weights if isinstance(weights, WeightSource) else WeightSource(weights, measure, design.n)
    comps = mixture_components(kernels, nu, R, design)
    return _assemble(comps, R, ws, design, measure, compute_Vn, block)


def independent_limit_bundle(R, weights, design: Design, measure: IntegrationMeasure,
                             block: int = BLOCK) -> MomentBundle:
    """Limit bundle as the assumed range parameter grows without bound.

    The design correlations vanish (K_n -> I) and the formulas reduce to
    u = diag(R^T R), J = 1 + int ||w||^2 dmu,
    b = J u + 2 diag(R^T [int w w^T dmu] R),
    S = u u^T + 2 (R^T R)^{o2}. V is not computed in the limit.
    """
    R = _loo_matrix(R)
    ws = weights if isinstance(weights, WeightSource) else WeightSource(weights, measure, design.n)
    comp = _component_for(None, 1.0, R, design)
    return _assemble([comp], R, ws, design, measure, False, block)


def flat_limit_diagnostics(R, weights, measure: IntegrationMeasure) -> dict:
    """Limits as the assumed range parameter tends to zero.

    Reports J(0) = int (1 - w^T 1)^2 dmu, u(0) = (R^T 1)^{o2},
    b(0) = 3 J(0) u(0), and whether the predictor is in the sum-to-one
    class (u(0) = 0 and J(0) = 0, the benign case). Otherwise S(0) is
    the rank-one matrix 3 u(0) u(0)^T and the estimator has no flat
    limit.
    """
    R = _loo_matrix(R)
    u0 = (R.T @ np.ones(R.shape[0])) ** 2
    J0 = 0.0
    ws = weights
    if not isinstance(ws, WeightSource):
        ws = WeightSource(ws, measure, R.shape[0])
    for lo in range(0, measure.size, BLOCK):
        hi = min(lo + BLOCK, measure.size)
        W = ws.block(lo, hi)
        J0 += float(measure.weights[lo:hi] @ (1.0 - W.sum(axis=1)) ** 2)
    sum_to_one = bool(J0 < 1e-12 and np.max(u0, initial=0.0) < 1e-12)
    return {
        "J0": J0,
        "u0": u0,
        "b0": 3.0 * J0 * u0,
        "rank_one_S0": not sum_to_one,
        "sum_to_one_class": sum_to_one,
    }
