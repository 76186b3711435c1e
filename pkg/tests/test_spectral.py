import math

import numpy as np
import pytest

from fracnash.spectral import (
    MeasureSpace,
    ScalarFunction,
    SpectralOperator,
    apply_function,
    eigendecompose,
    heat_semigroup,
    norm_1_to_inf,
    quadratic_form,
)


def cycle_matrix(n):
    m = np.zeros((n, n))
    for i in range(n):
        m[i, i] = 2.0
        m[i, (i + 1) % n] = -1.0
        m[(i + 1) % n, i] = -1.0
    return m


def test_measure_space_rejects_bad_weights():
    with pytest.raises(ValueError):
        MeasureSpace(np.array([1.0, 0.0]))
    with pytest.raises(ValueError):
        MeasureSpace(np.array([1.0, -2.0]))


def test_cauchy_schwarz_l1_l2():
    rng = np.random.default_rng(0)
    space = MeasureSpace(rng.uniform(0.1, 3.0, size=12))
    for _ in range(50):
        f = rng.standard_normal(12)
        assert space.norm(f, 1) <= space.norm(f, 2) * math.sqrt(space.total_mass) + 1e-12


def test_eigendecompose_cycle_closed_form():
    n = 4
    op = eigendecompose(cycle_matrix(n), MeasureSpace.counting(n))
    expected = np.sort([2.0 - 2.0 * math.cos(2.0 * math.pi * k / n) for k in range(n)])
    np.testing.assert_allclose(op.eigenvalues, expected, atol=1e-10)


def test_eigendecompose_zero_and_diag():
    op = eigendecompose(np.zeros((3, 3)), MeasureSpace.counting(3))
    np.testing.assert_allclose(op.eigenvalues, 0.0, atol=1e-12)
    op = eigendecompose(np.diag([1.0, 3.0]), MeasureSpace.counting(2))
    np.testing.assert_allclose(op.eigenvalues, [1.0, 3.0], atol=1e-12)


def test_eigendecompose_reconstruction_and_orthonormality():
    rng = np.random.default_rng(1)
    w = rng.uniform(0.2, 2.0, size=9)
    space = MeasureSpace(w)
    # build a matrix self-adjoint w.r.t. w: M = W^{-1/2} S W^{1/2} with S symmetric
    s = rng.standard_normal((9, 9))
    s = 0.5 * (s + s.T) + 9 * np.eye(9)
    m = (s / np.sqrt(w)[:, None]) * np.sqrt(w)[None, :]
    op = eigendecompose(m, space)
    gram = op.eigenvectors.T @ (w[:, None] * op.eigenvectors)
    np.testing.assert_allclose(gram, np.eye(9), atol=1e-10)
    np.testing.assert_allclose(op.matrix(), m, atol=1e-9)


def test_eigendecompose_accuracy_n512():
    rng = np.random.default_rng(512)
    w = rng.uniform(0.3, 3.0, size=512)
    space = MeasureSpace(w)
    s = rng.standard_normal((512, 512)) / math.sqrt(512)
    s = s @ s.T + np.eye(512)
    m = (s / np.sqrt(w)[:, None]) * np.sqrt(w)[None, :]
    op = eigendecompose(m, space)
    gram = op.eigenvectors.T @ (w[:, None] * op.eigenvectors)
    assert np.max(np.abs(gram - np.eye(512))) < 1e-10
    assert np.max(np.abs(op.matrix() - m)) < 1e-9


def test_eigendecompose_rejects_asymmetric():
    m = np.array([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(ValueError, match="asymmetry"):
        eigendecompose(m, MeasureSpace.counting(2))


def test_eigendecompose_rejects_negative_spectrum():
    with pytest.raises(ValueError, match="negative eigenvalue"):
        eigendecompose(np.diag([-1.0, 2.0]), MeasureSpace.counting(2))


def test_apply_function_identity_sqrt_heat():
    space = MeasureSpace.counting(2)
    op = eigendecompose(np.diag([0.0, 4.0]), space)
    np.testing.assert_allclose(apply_function(op, lambda x: x), np.diag([0.0, 4.0]), atol=1e-12)
    np.testing.assert_allclose(
        apply_function(op, lambda x: math.sqrt(x)), np.diag([0.0, 2.0]), atol=1e-12
    )
    np.testing.assert_allclose(heat_semigroup(op, 0.0), np.eye(2), atol=1e-12)


def test_apply_function_rejects_non_finite():
    op = eigendecompose(np.diag([0.0, 1.0]), MeasureSpace.counting(2))
    with np.errstate(divide="ignore"), pytest.raises(ValueError, match="eigenvalue"):
        apply_function(op, lambda x: np.divide(1.0, x))


def test_quadratic_form_eigenvector_and_kernel():
    op = eigendecompose(cycle_matrix(6), MeasureSpace.counting(6))
    for i in (0, 2, 5):
        u = op.eigenvectors[:, i]
        for alpha in (0.3, 1.0, 2.0):
            assert quadratic_form(op, alpha, u) == pytest.approx(op.eigenvalues[i] ** alpha, abs=1e-10)
    const = np.ones(6)
    assert quadratic_form(op, 1.0, const) == pytest.approx(0.0, abs=1e-10)


def test_quadratic_form_matches_apply_function():
    op = eigendecompose(np.diag([1.0, 4.0]), MeasureSpace.counting(2))
    f = np.array([1.0, 1.0]) / math.sqrt(2.0)
    direct = quadratic_form(op, 0.5, f)
    via_matrix = f @ apply_function(op, lambda x: math.sqrt(x)) @ f
    assert direct == pytest.approx(via_matrix, abs=1e-12)
    assert quadratic_form(op, 0.0, f) == pytest.approx(1.0, abs=1e-12)


def test_norm_1_to_inf_examples():
    space = MeasureSpace.counting(3)
    assert norm_1_to_inf(np.eye(3), space) == pytest.approx(1.0)
    w = np.array([0.5, 1.5, 2.0])
    wspace = MeasureSpace(w)
    proj = np.outer(np.ones(3), w) / w.sum()
    assert norm_1_to_inf(proj, wspace) == pytest.approx(1.0 / w.sum(), abs=1e-14)


def test_norm_1_to_inf_brute_force_heat():
    n = 8
    space = MeasureSpace.counting(n)
    op = eigendecompose(cycle_matrix(n), space)
    k = heat_semigroup(op, 0.7)
    fast = norm_1_to_inf(k, space)
    # brute force: sup over scaled point masses of ||T f||_inf / ||f||_1
    brute = max(np.max(np.abs(k @ (np.eye(n)[j] / space.weights[j]))) for j in range(n))
    assert fast == pytest.approx(brute, rel=1e-12)


def test_functional_calculus_homomorphism():
    op = eigendecompose(cycle_matrix(5), MeasureSpace.counting(5))
    p1 = lambda x: 1.0 + 2.0 * x
    p2 = lambda x: x * x - 0.5
    lhs = apply_function(op, lambda x: p1(x) * p2(x))
    rhs = apply_function(op, p1) @ apply_function(op, p2)
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


def test_semigroup_law_and_contraction():
    op = eigendecompose(cycle_matrix(7), MeasureSpace.counting(7))
    np.testing.assert_allclose(
        heat_semigroup(op, 0.4) @ heat_semigroup(op, 0.9), heat_semigroup(op, 1.3), atol=1e-9
    )
    rng = np.random.default_rng(2)
    for t in (0.1, 1.0, 10.0):
        tt = heat_semigroup(op, t)
        for _ in range(10):
            f = rng.standard_normal(7)
            assert op.space.norm(tt @ f, 2) <= op.space.norm(f, 2) + 1e-12


def test_spectral_measure_mass():
    rng = np.random.default_rng(3)
    w = rng.uniform(0.5, 1.5, size=6)
    space = MeasureSpace(w)
    s = rng.standard_normal((6, 6))
    s = s @ s.T + 6 * np.eye(6)
    m = (s / np.sqrt(w)[:, None]) * np.sqrt(w)[None, :]
    op = eigendecompose(m, space)
    for _ in range(20):
        f = rng.standard_normal(6)
        coeffs = op.coefficients(f)
        assert np.sum(coeffs**2) == pytest.approx(space.norm(f, 2) ** 2, abs=1e-10)


def test_scalar_function_spot_check():
    good = ScalarFunction(lambda x: x * x, non_decreasing=True, convex=True)
    good.spot_check(np.linspace(0, 5, 30))
    bad = ScalarFunction(lambda x: -x, non_decreasing=True)
    with pytest.raises(ValueError, match="non-decreasing"):
        bad.spot_check(np.linspace(0, 5, 30))
