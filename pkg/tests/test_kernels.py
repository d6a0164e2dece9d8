import math

import numpy as np
import pytest

from looise.errors import DimensionMismatch, DuplicatePoints
from looise.kernels import (
    FAMILIES,
    KernelSpec,
    cross_matrix,
    cross_vector,
    kernel_eval,
    kernel_matrix,
)


def psi_reference(family, s):
    """Independent closed-form re-implementation (math module only)."""
    if family == "matern12":
        return math.exp(-s)
    if family == "matern32":
        return (1 + math.sqrt(3) * s) * math.exp(-math.sqrt(3) * s)
    if family == "matern52":
        return (1 + math.sqrt(5) * s + 5 * s * s / 3) * math.exp(-math.sqrt(5) * s)
    if family == "gaussian":
        return math.exp(-s * s)
    if family == "inverse-multiquadric":
        return 1 / (1 + s * s)
    raise ValueError(family)


@pytest.mark.parametrize("family", FAMILIES)
def test_unit_at_zero_distance(family):
    spec = KernelSpec(family, 3.0)
    assert kernel_eval(spec, [0.2, 0.3], [0.2, 0.3]) == 1.0


@pytest.mark.parametrize("family", FAMILIES)
def test_diag_includes_nugget(family):
    spec = KernelSpec(family, 3.0, nugget=0.25)
    assert kernel_eval(spec, [0.1], [0.1]) == 1.25


def test_inverse_multiquadric_closed_form():
    spec = KernelSpec("inverse-multiquadric", 2.0)
    assert np.isclose(kernel_eval(spec, [0.0], [1.0]), 0.2, rtol=0, atol=1e-15)


def test_matern32_value():
    spec = KernelSpec("matern32", 10.0)
    expected = (1 + math.sqrt(3)) * math.exp(-math.sqrt(3))  # 0.4834...
    assert np.isclose(kernel_eval(spec, [0.0], [0.1]), expected, rtol=1e-12)
    assert np.isclose(expected, 0.4834, atol=2e-4)


@pytest.mark.parametrize("family", FAMILIES)
def test_matches_reference_at_random_distances(family):
    gen = np.random.default_rng(11)
    theta = 4.2
    spec = KernelSpec(family, theta)
    for r in gen.uniform(0.0, 3.0, size=50):
        got = kernel_eval(spec, [0.0], [r])
        assert np.isclose(got, psi_reference(family, theta * r), rtol=1e-13)


@pytest.mark.parametrize("family", FAMILIES)
def test_symmetry_exact(family):
    spec = KernelSpec(family, 1.7)
    gen = np.random.default_rng(5)
    for _ in range(10):
        x, y = gen.uniform(size=3), gen.uniform(size=3)
        assert kernel_eval(spec, x, y) == kernel_eval(spec, y, x)


@pytest.mark.parametrize("family", FAMILIES)
def test_monotone_decreasing(family):
    spec = KernelSpec(family, 2.0)
    dists = np.linspace(0.0, 4.0, 60)
    vals = [kernel_eval(spec, [0.0], [d]) for d in dists]
    assert all(a >= b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 2e-2  # inverse-multiquadric has the heaviest tail, 1/65 here


def test_kernel_matrix_single_point():
    K = kernel_matrix(KernelSpec("matern32", 2.0, nugget=0.5), [[0.3, 0.4]])
    assert K.shape == (1, 1) and K[0, 0] == 1.5


def test_kernel_matrix_matches_eval():
    spec = KernelSpec("matern52", 6.0)
    pts = np.array([[0.1, 0.2], [0.8, 0.5], [0.3, 0.9]])
    K = kernel_matrix(spec, pts)
    for i in range(3):
        for j in range(3):
            assert np.isclose(K[i, j], kernel_eval(spec, pts[i], pts[j]), rtol=1e-15)


def test_kernel_matrix_grid_spd():
    from looise.designs import regular_grid

    K = kernel_matrix(KernelSpec("matern32", 10.0), regular_grid(2, 10).points)
    assert np.linalg.eigvalsh(K).min() > 0


def test_nugget_adds_identity_exactly():
    pts = np.random.default_rng(0).uniform(size=(8, 2))
    K0 = kernel_matrix(KernelSpec("gaussian", 3.0), pts)
    K1 = kernel_matrix(KernelSpec("gaussian", 3.0, nugget=0.0625), pts)
    assert np.array_equal(K1, K0 + 0.0625 * np.eye(8))


def test_duplicate_points_rejected_when_no_nugget():
    with pytest.raises(DuplicatePoints):
        kernel_matrix(KernelSpec("matern32", 1.0), [[0.1], [0.1]])
    # allowed with a nugget
    K = kernel_matrix(KernelSpec("matern32", 1.0, nugget=0.1), [[0.1], [0.1]])
    assert K[0, 0] == 1.1


def test_cross_vector_at_design_point():
    pts = np.array([[0.0], [0.5], [1.0]])
    k = cross_vector(KernelSpec("matern32", 5.0), pts, [0.0])
    assert k[0] == 1.0


def test_cross_vector_excludes_nugget():
    pts = np.array([[0.0], [0.5], [1.0]])
    k = cross_vector(KernelSpec("matern32", 5.0, nugget=0.0625), pts, [0.0])
    assert k[0] == 1.0


def test_cross_vector_decay():
    pts = np.array([[0.0], [0.1]])
    k = cross_vector(KernelSpec("gaussian", 100.0), pts, [1.0])
    assert np.all(k < 1e-8)


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        kernel_eval(KernelSpec("matern32", 1.0), [0.0], [0.0, 1.0])
    with pytest.raises(DimensionMismatch):
        cross_matrix(KernelSpec("matern32", 1.0), [[0.0], [1.0]], [[0.0, 1.0]])


def test_spec_validation():
    with pytest.raises(ValueError):
        KernelSpec("matern32", 0.0)
    with pytest.raises(ValueError):
        KernelSpec("matern32", 1.0, nugget=-1e-3)
    with pytest.raises(ValueError):
        KernelSpec("cubic", 1.0)
