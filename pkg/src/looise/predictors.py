"""Linear predictors and their closed-form leave-one-out residual operators.

Every predictor maps a point x to a weight vector w(x) in R^n over a
fixed design, so that the prediction is w(x)^T y. The LOO residual
vector is linear in y as well: eps_loo = R^T y for an n x n matrix R
computed in closed form per variant (block-inversion identities for the
kriging family, direct algebra for the empirical mean). A brute-force
n-refit fallback serves as the oracle for any predictor.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import numerics
from .designs import Design
from .errors import DimensionMismatch, LooiseError, RankDeficient, WeightSimplexViolation
from .kernels import KernelSpec, cross_matrix, kernel_matrix

RANK_DEFICIENT_COND = 1e12


@dataclass(frozen=True)
class LooOperator:
    """Matrix R with eps_loo = R^T y, and a full-rank flag."""

    matrix: np.ndarray
    full_rank: bool

    @property
    def n(self) -> int:
        return self.matrix.shape[0]


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    return X


class LinearPredictor:
    """Base class; subclasses bind to a design and stay immutable."""

    design: Design

    @property
    def n(self) -> int:
        return self.design.n

    def weights_matrix(self, X) -> np.ndarray:
        """(m, n) weight matrix, one row per evaluation point."""
        raise NotImplementedError

    def weights(self, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return self.weights_matrix(x[None, :])[0]

    def predict(self, y, x) -> float:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({self.n},)")
        return float(self.weights(x) @ y)

    def predict_many(self, y, X) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({self.n},)")
        return self.weights_matrix(X) @ y

    def drop_point(self, i: int) -> "LinearPredictor":
        """Same predictor refit on the design without point i (for the LOO oracle)."""
        raise NotImplementedError

    def _loo_matrix(self) -> np.ndarray:
        raise NotImplementedError

    @cached_property
    def loo(self) -> LooOperator:
        R = self._loo_matrix()
        sv = np.linalg.svd(R, compute_uv=False)
        full_rank = bool(sv[-1] > sv[0] / RANK_DEFICIENT_COND)
        # predictors whose weights sum to one satisfy R^T 1 = 0, so one lost
        # direction is structural and benign (S stays invertible); anything
        # beyond that makes the moment matrices degenerate
        if len(sv) >= 2 and not sv[-2] > sv[0] / RANK_DEFICIENT_COND:
            raise RankDeficient(
                "LOO operator is rank deficient beyond the sum-to-one direction"
            )
        return LooOperator(matrix=R, full_rank=full_rank)

    def loo_operator(self) -> LooOperator:
        return self.loo

    def loo_residuals(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if y.shape != (self.n,):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({self.n},)")
        return self.loo.matrix.T @ y


def _reduced_design(design: Design, i: int) -> Design:
    pts = np.delete(design.points, i, axis=0)
    return Design(points=pts, provenance=design.provenance)


class SimpleKriging(LinearPredictor):
    """Posterior-mean predictor for a zero-mean GP: w(x) = K_n^{-1} k_n(x)."""

    def __init__(self, kernel: KernelSpec, design: Design):
        self.kernel = kernel
        self.design = design
        self._fact = numerics.spd_factorize(kernel_matrix(kernel, design.points))

    def weights_matrix(self, X) -> np.ndarray:
        C = cross_matrix(self.kernel, self.design.points, _as_points(X))
        return numerics.solve(self._fact, C.T).T

    def _loo_matrix(self) -> np.ndarray:
        M = numerics.inverse(self._fact)
        return M / np.diag(M)[None, :]

    def drop_point(self, i: int) -> "SimpleKriging":
        return SimpleKriging(self.kernel, _reduced_design(self.design, i))


class OrdinaryKriging(LinearPredictor):
    """Kriging with unknown constant mean; weights constrained to sum to one."""

    def __init__(self, kernel: KernelSpec, design: Design):
        self.kernel = kernel
        self.design = design
        K = kernel_matrix(kernel, design.points)
        self._fact = numerics.spd_factorize(K)
        self._a = numerics.solve(self._fact, np.ones(design.n))
        self._s = float(np.ones(design.n) @ self._a)
        self._K = K

    def weights_matrix(self, X) -> np.ndarray:
        C = cross_matrix(self.kernel, self.design.points, _as_points(X))
        base = numerics.solve(self._fact, C.T).T
        mult = (1.0 - C @ self._a) / self._s
        return base + mult[:, None] * self._a[None, :]

    def _loo_matrix(self) -> np.ndarray:
        Mbar = numerics.bordered_inverse(self._K)
        n = self.n
        return Mbar[:n, :n] / np.diag(Mbar)[:n][None, :]

    def drop_point(self, i: int) -> "OrdinaryKriging":
        return OrdinaryKriging(self.kernel, _reduced_design(self.design, i))


# ---------------------------------------------------------------------------
# Bayesian polynomial regression (tensorized Legendre basis)
# ---------------------------------------------------------------------------

# Multi-index table for the d=2, m=50 basis of total degree 9, ordered by
# decreasing prior weight Lambda (lambda_k geometric in the degree).
POLY_INDEX_TABLE_D2_M50 = (
    (0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (1, 2), (2, 1), (0, 3), (3, 0),
    (2, 2), (1, 3), (3, 1), (0, 4), (4, 0), (2, 3), (3, 2), (1, 4), (4, 1), (0, 5),
    (5, 0), (3, 3), (2, 4), (4, 2), (1, 5), (5, 1), (0, 6), (6, 0), (2, 5), (5, 2),
    (3, 4), (4, 3), (1, 6), (6, 1), (0, 7), (7, 0), (3, 5), (5, 3), (2, 6), (6, 2),
    (4, 4), (1, 7), (7, 1), (0, 8), (8, 0), (4, 5), (5, 4), (3, 6), (6, 3), (2, 7),
)


def legendre_orthonormal(degree: int, x) -> np.ndarray:
    """Legendre polynomial of the given degree, orthonormal on [0,1]."""
    x = np.asarray(x, dtype=float)
    t = 2.0 * x - 1.0
    p_prev = np.ones_like(t)
    if degree == 0:
        return p_prev
    p = t.copy()
    for k in range(1, degree):
        p, p_prev = ((2 * k + 1) * t * p - k * p_prev) / (k + 1), p
    return np.sqrt(2.0 * degree + 1.0) * p


def tensor_basis(X, indices) -> np.ndarray:
    """(m_points, n_terms) matrix of tensorized Legendre terms."""
    X = _as_points(X)
    idx = np.asarray(indices, dtype=int)
    if idx.shape[1] != X.shape[1]:
        raise DimensionMismatch("multi-index dimension does not match the points")
    max_deg = int(idx.max())
    per_dim = [
        np.stack([legendre_orthonormal(k, X[:, j]) for k in range(max_deg + 1)])
        for j in range(X.shape[1])
    ]
    out = np.ones((X.shape[0], idx.shape[0]))
    for col, multi in enumerate(idx):
        for j, k in enumerate(multi):
            out[:, col] *= per_dim[j][k]
    return out


def poly_prior_weights(indices, c: float = 1000.0, t: float = 2.0) -> np.ndarray:
    """Prior variances Lambda_l = prod_j c * t^(-l_j) for each multi-index."""
    idx = np.asarray(indices, dtype=int)
    return np.prod(c * np.power(float(t), -idx.astype(float)), axis=1)


def poly_basis(d: int, m: int, c: float = 1000.0, t: float = 2.0):
    """Multi-indices and prior weights of the m terms with largest Lambda.

    The d=2, m=50 case returns the shipped table; other sizes select the
    m largest prior weights with a deterministic tie-break (total degree,
    then lexicographic).
    """
    if d == 2 and m == 50:
        idx = np.asarray(POLY_INDEX_TABLE_D2_M50, dtype=int)
        return idx, poly_prior_weights(idx, c, t)
    max_deg = 12
    from itertools import product

    all_idx = np.array(list(product(range(max_deg + 1), repeat=d)), dtype=int)
    lam = poly_prior_weights(all_idx, c, t)
    order = sorted(range(len(all_idx)),
                   key=lambda i: (-lam[i], int(all_idx[i].sum()), tuple(all_idx[i])))
    keep = np.asarray(order[:m], dtype=int)
    return all_idx[keep], lam[keep]


class BayesPolynomial(LinearPredictor):
    """Posterior-mean polynomial predictor with a Gaussian prior on the
    coefficients and i.i.d. observation noise; equivalently the
    simple-kriging predictor for the degenerate kernel
    sum_l Lambda_l phi_l(x) phi_l(x') plus a nugget of noise_var."""

    def __init__(self, indices, prior_diag, noise_var: float, design: Design):
        self.indices = np.asarray(indices, dtype=int)
        self.prior_diag = np.asarray(prior_diag, dtype=float)
        self.noise_var = float(noise_var)
        self.design = design
        self._phi = tensor_basis(design.points, self.indices)
        K = (self._phi * self.prior_diag) @ self._phi.T + self.noise_var * np.eye(design.n)
        self._fact = numerics.spd_factorize(K)

    def weights_matrix(self, X) -> np.ndarray:
        phi_new = tensor_basis(_as_points(X), self.indices)
        C = (phi_new * self.prior_diag) @ self._phi.T
        return numerics.solve(self._fact, C.T).T

    def _loo_matrix(self) -> np.ndarray:
        M = numerics.inverse(self._fact)
        return M / np.diag(M)[None, :]

    def drop_point(self, i: int) -> "BayesPolynomial":
        return BayesPolynomial(self.indices, self.prior_diag, self.noise_var,
                               _reduced_design(self.design, i))


class EmpiricalMean(LinearPredictor):
    """Constant predictor equal to the mean of the observations."""

    def __init__(self, design: Design):
        self.design = design

    def weights_matrix(self, X) -> np.ndarray:
        X = _as_points(X)
        return np.full((X.shape[0], self.n), 1.0 / self.n)

    def _loo_matrix(self) -> np.ndarray:
        n = self.n
        return (n * np.eye(n) - np.ones((n, n))) / (n - 1)

    def drop_point(self, i: int) -> "EmpiricalMean":
        return EmpiricalMean(_reduced_design(self.design, i))


class FixedMixture(LinearPredictor):
    """Fixed convex (or affine) combination of predictors on one design."""

    def __init__(self, components, nu):
        self.components = list(components)
        self.nu = np.asarray(nu, dtype=float)
        if len(self.components) != len(self.nu):
            raise DimensionMismatch("one weight per component required")
        if abs(self.nu.sum() - 1.0) > 1e-12:
            raise WeightSimplexViolation("mixture weights must sum to 1")
        designs = {id(c.design) for c in self.components}
        if len(designs) > 1:
            pts = [c.design.points for c in self.components]
            if not all(np.array_equal(pts[0], p) for p in pts[1:]):
                raise DimensionMismatch("mixture components must share the design")
        self.design = self.components[0].design

    def weights_matrix(self, X) -> np.ndarray:
        out = self.nu[0] * self.components[0].weights_matrix(X)
        for nu_t, comp in zip(self.nu[1:], self.components[1:]):
            out += nu_t * comp.weights_matrix(X)
        return out

    def _loo_matrix(self) -> np.ndarray:
        out = self.nu[0] * self.components[0].loo.matrix
        for nu_t, comp in zip(self.nu[1:], self.components[1:]):
            out += nu_t * comp.loo.matrix
        return out

    def loo_matrix_by_component(self, y) -> np.ndarray:
        """(T, n) matrix of per-component LOO residuals for the same y."""
        return np.stack([c.loo_residuals(y) for c in self.components])

    def drop_point(self, i: int) -> "FixedMixture":
        return FixedMixture([c.drop_point(i) for c in self.components], self.nu)


class TableWeights(LinearPredictor):
    """Black-box linear predictor given by a weight table over fixed points.

    Weight rows are looked up by exact point match, so evaluation is only
    possible on (subsets of) the tabulated support. A LOO matrix may be
    supplied alongside; without one the LOO operator is unavailable.
    """

    def __init__(self, support, table, design: Design, loo_matrix=None):
        self.design = design
        self.support = _as_points(support)
        self.table = np.asarray(table, dtype=float)
        if self.table.shape != (len(self.support), design.n):
            raise DimensionMismatch("weight table must be (len(support), n)")
        self._index = {pt.tobytes(): i for i, pt in enumerate(self.support)}
        self._loo_given = None
        if loo_matrix is not None:
            self._loo_given = np.asarray(loo_matrix, dtype=float)
            if self._loo_given.shape != (design.n, design.n):
                raise DimensionMismatch("LOO matrix must be n x n")

    def weights_matrix(self, X) -> np.ndarray:
        X = _as_points(X)
        rows = np.empty(len(X), dtype=int)
        for i, pt in enumerate(X):
            key = pt.tobytes()
            if key not in self._index:
                raise LooiseError("point not in the tabulated support")
            rows[i] = self._index[key]
        return self.table[rows]

    def _loo_matrix(self) -> np.ndarray:
        if self._loo_given is None:
            raise LooiseError("no LOO matrix supplied for the weight-table predictor")
        return self._loo_given

    def drop_point(self, i: int):
        raise LooiseError("a weight-table predictor cannot be refit")


def loo_residuals_bruteforce(predictor: LinearPredictor, y) -> np.ndarray:
    """Oracle LOO residuals by n actual refits; O(n^4), for tests only."""
    y = np.asarray(y, dtype=float)
    n = predictor.n
    out = np.empty(n)
    for i in range(n):
        sub = predictor.drop_point(i)
        y_sub = np.delete(y, i)
        out[i] = y[i] - sub.predict(y_sub, predictor.design.points[i])
    return out
