"""Dense symmetric-positive-definite linear algebra shared by all modules.

Everything here wraps LAPACK (through scipy) behind a small, strict
interface: factorizations are immutable, inputs are validated, and
near-singular matrices fail loudly after a bounded jitter escalation
instead of silently regularizing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import Asymmetric, DimensionMismatch, NotPositiveDefinite, SingularBorder

# Escalation ladder for the diagonal jitter, as multiples of mean(diag(A)).
JITTER_LADDER = (0.0, 1e-12, 1e-10, 1e-8)

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class SpdFactorization:
    """Lower-triangular Cholesky factor of a (possibly jittered) SPD matrix."""

    lower: np.ndarray
    jitter_applied: float

    @property
    def n(self) -> int:
        return self.lower.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Return L @ L.T, the jittered input."""
        return self.lower @ self.lower.T

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))


def spd_factorize(A: np.ndarray) -> SpdFactorization:
    """Cholesky-factorize a symmetric positive-definite matrix.

    The input is symmetrized by (A + A.T)/2 before factorization; matrices
    asymmetric beyond ``SYMMETRY_RTOL`` (relative to ||A||_F) are rejected.
    If plain Cholesky fails, a jitter of {1e-12, 1e-10, 1e-8} * mean(diag(A))
    is added to the diagonal, in that order, and the applied amount is
    recorded on the result.

    Raises
    ------
    NotPositiveDefinite
        If factorization still fails at the largest jitter level.
    Asymmetric
        If the input violates the symmetry tolerance.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {A.shape}")
    scale = np.linalg.norm(A)
    asym = np.linalg.norm(A - A.T)
    if scale > 0 and asym > SYMMETRY_RTOL * scale:
        raise Asymmetric(f"relative asymmetry {asym / scale:.3e} exceeds {SYMMETRY_RTOL:.0e}")
    A = 0.5 * (A + A.T)

    mean_diag = float(np.mean(np.diag(A))) if A.size else 0.0
    for level in JITTER_LADDER:
        jitter = level * abs(mean_diag)
        try:
            L = scipy.linalg.cholesky(
                A + jitter * np.eye(A.shape[0]) if jitter else A,
                lower=True,
                check_finite=False,
            )
        except scipy.linalg.LinAlgError:
            continue
        # a jittered success whose smallest pivot is explained by the jitter
        # itself means the input is genuinely singular, not rounding-indefinite
        if jitter and float(np.min(np.diag(L)) ** 2) <= 10.0 * jitter:
            continue
        return SpdFactorization(lower=L, jitter_applied=jitter)
    raise NotPositiveDefinite(
        f"matrix of size {A.shape[0]} is not positive definite after jitter escalation"
    )


def solve(F: SpdFactorization, B: np.ndarray) -> np.ndarray:
    """Solve A @ X = B given the factorization of A. B may be a vector or matrix."""
    B = np.asarray(B, dtype=float)
    if B.shape[0] != F.n:
        raise DimensionMismatch(f"rhs has leading dimension {B.shape[0]}, expected {F.n}")
    return scipy.linalg.cho_solve((F.lower, True), B, check_finite=False)


def inverse(F: SpdFactorization) -> np.ndarray:
    """Explicit inverse A^{-1}; only for n-sized matrices that are reused many times."""
    return solve(F, np.eye(F.n))


def rcond_estimate(F: SpdFactorization) -> float:
    """Cheap reciprocal-condition estimate of the factorized matrix
    (squared 1-norm estimate of the triangular factor)."""
    rc, info = scipy.linalg.lapack.dtrcon(F.lower, uplo=b"L")
    if info != 0:
        return 0.0
    return float(rc) ** 2


def bordered_inverse(K: np.ndarray) -> np.ndarray:
    """Inverse of the (n+1)x(n+1) bordered matrix [[K, 1], [1^T, 0]].

    K must be SPD. Computed by block inversion through the Cholesky factor
    of K: with a = K^{-1} 1 and s = 1^T K^{-1} 1,

        inv = [[K^{-1} - a a^T / s,  a / s],
               [a^T / s,            -1 / s]].

    Raises
    ------
    SingularBorder
        If 1^T K^{-1} 1 is numerically zero (cannot occur for an exactly
        SPD K; guards against breakdown on nearly singular input).
    """
    F = spd_factorize(K)
    n = F.n
    ones = np.ones(n)
    a = solve(F, ones)
    s = float(ones @ a)
    if not np.isfinite(s) or abs(s) < 1e-14:
        raise SingularBorder("1^T K^{-1} 1 is numerically zero")
    out = np.empty((n + 1, n + 1))
    out[:n, :n] = inverse(F) - np.outer(a, a) / s
    out[:n, n] = a / s
    out[n, :n] = a / s
    out[n, n] = -1.0 / s
    return out


def hadamard_square(A: np.ndarray) -> np.ndarray:
    """Entrywise square of a matrix or vector."""
    A = np.asarray(A)
    return A * A
