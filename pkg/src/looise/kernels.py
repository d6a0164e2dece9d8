"""Isotropic correlation kernels, kernel matrices and cross-correlation vectors.

A kernel is described by a :class:`KernelSpec` (family, range parameter
theta, optional nugget). The correlation between two points is
``psi_family(theta * ||x - x'||)`` plus the nugget when the points
coincide exactly. The nugget models observation noise: it enters the
design kernel matrix (diagonal) but never the cross-correlation vector
to a prediction point, even when that point coincides with a design
point, because predictions target the noise-free process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, DuplicatePoints

FAMILIES = ("matern12", "matern32", "matern52", "gaussian", "inverse-multiquadric")

_SQRT3 = math.sqrt(3.0)
_SQRT5 = math.sqrt(5.0)

# Distance below which two points are treated as coincident.
COINCIDENCE_TOL = 1e-14


@dataclass(frozen=True)
class KernelSpec:
    """Isotropic correlation family with range parameter and optional nugget."""

    family: str
    theta: float
    nugget: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if not self.theta > 0:
            raise ValueError("theta must be > 0")
        if self.nugget < 0:
            raise ValueError("nugget must be >= 0")

    def with_theta(self, theta: float) -> "KernelSpec":
        return KernelSpec(self.family, float(theta), self.nugget)


def correlation(family: str, s):
    """psi_family(s) for scaled distance s = theta * r, vectorized over s."""
    s = np.asarray(s, dtype=float)
    if family == "matern12":
        return np.exp(-s)
    if family == "matern32":
        t = _SQRT3 * s
        return (1.0 + t) * np.exp(-t)
    if family == "matern52":
        t = _SQRT5 * s
        return (1.0 + t + (5.0 / 3.0) * s * s) * np.exp(-t)
    if family == "gaussian":
        return np.exp(-s * s)
    if family == "inverse-multiquadric":
        return 1.0 / (1.0 + s * s)
    raise ValueError(f"unknown kernel family {family!r}")


def kernel_eval(spec: KernelSpec, x, x2) -> float:
    """Correlation between two points; adds the nugget iff x == x2 exactly."""
    x = np.asarray(x, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x.shape != x2.shape:
        raise DimensionMismatch(f"point dimensions differ: {x.shape} vs {x2.shape}")
    r = float(np.linalg.norm(x - x2))
    val = float(correlation(spec.family, spec.theta * r))
    if spec.nugget and np.array_equal(x, x2):
        val += spec.nugget
    return val


def _pairwise_distances(X, Y) -> np.ndarray:
    """Euclidean distance matrix between rows of X (n,d) and Y (m,d)."""
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DimensionMismatch(f"expected an (n, d) array of points, got shape {X.shape}")
    return X


def kernel_matrix(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric kernel matrix on the design X; diagonal equals 1 + nugget.

    Raises
    ------
    DuplicatePoints
        If the nugget is zero and two points coincide within 1e-14
        (the matrix would be exactly singular).
    """
    X = _as_points(X)
    D = _pairwise_distances(X, X)
    if spec.nugget == 0.0:
        off = D + np.diag(np.full(len(X), np.inf))
        if len(X) > 1 and off.min() <= COINCIDENCE_TOL:
            i, j = np.unravel_index(int(off.argmin()), off.shape)
            raise DuplicatePoints(f"points {i} and {j} coincide and the nugget is zero")
    K = correlation(spec.family, spec.theta * D)
    if spec.nugget:
        K = K + spec.nugget * (D <= COINCIDENCE_TOL)
    return 0.5 * (K + K.T)


def cross_matrix(spec: KernelSpec, X, Xnew) -> np.ndarray:
    """(m, n) matrix of correlations between new points (rows) and the design.

    The nugget is never added here, even at exact coincidence: the target
    is a new realization of the noise-free process.
    """
    X = _as_points(X)
    Xnew = _as_points(Xnew)
    if X.shape[1] != Xnew.shape[1]:
        raise DimensionMismatch(
            f"design dimension {X.shape[1]} != point dimension {Xnew.shape[1]}"
        )
    return correlation(spec.family, spec.theta * _pairwise_distances(Xnew, X))


def cross_vector(spec: KernelSpec, X, x) -> np.ndarray:
    """Correlations k(x, x_i) between one point and the design (nugget excluded)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    return cross_matrix(spec, X, x[None, :])[0]
