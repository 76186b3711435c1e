import math

import numpy as np
import pytest
from scipy.stats import levy_stable

from fracnash.generators import GeneratorSpec, build
from fracnash.spectral import apply_function, fractional_semigroup
from fracnash.subordinator import (
    StableSubordinator,
    laplace_check,
    poisson_semigroup,
    stable_density,
    stable_log_density,
    subordinate_semigroup,
)


def test_parameter_validation():
    with pytest.raises(ValueError):
        StableSubordinator(1.0, 1.0)
    with pytest.raises(ValueError):
        StableSubordinator(0.5, 0.0)
    with pytest.raises(ValueError):
        stable_density(StableSubordinator(0.5, 1.0), -1.0)


def test_half_stable_closed_form():
    sub = StableSubordinator(0.5, 1.0)
    expected = math.exp(-0.25) / (2.0 * math.sqrt(math.pi))
    assert stable_density(sub, 1.0) == pytest.approx(expected, rel=1e-14)
    # general t against the explicit kernel
    rng = np.random.default_rng(0)
    for _ in range(20):
        t = rng.uniform(0.2, 5.0)
        s = rng.uniform(0.05, 20.0)
        kernel = t / (2.0 * math.sqrt(math.pi)) * s**-1.5 * math.exp(-t * t / (4.0 * s))
        assert stable_density(StableSubordinator(0.5, t), s) == pytest.approx(kernel, rel=1e-13)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 0.7, 0.9])
def test_total_mass(alpha):
    for t in (0.1, 1.0, 10.0):
        assert StableSubordinator(alpha, t).total_mass() == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("alpha", [0.3, 0.55, 0.7, 0.9])
def test_density_against_scipy(alpha):
    # independent oracle: scipy's levy_stable with the Laplace-normalizing scale
    scale = math.cos(math.pi * alpha / 2.0) ** (1.0 / alpha)
    xs = np.geomspace(0.05, 50.0, 12)
    mine = np.asarray([stable_density(StableSubordinator(alpha, 1.0), x) for x in xs])
    ref = levy_stable.pdf(xs, alpha, 1.0, loc=0.0, scale=scale)
    mask = ref > 1e-12
    np.testing.assert_allclose(mine[mask], ref[mask], rtol=1e-7)


def test_scaling_self_consistency():
    rng = np.random.default_rng(4)
    for alpha in (0.3, 0.7):
        g1 = StableSubordinator(alpha, 1.0)
        for _ in range(10):
            t = rng.uniform(0.2, 8.0)
            s = rng.uniform(0.2, 30.0)
            scale = t ** (-1.0 / alpha)
            lhs = stable_density(StableSubordinator(alpha, t), s)
            rhs = scale * stable_density(g1, s * scale)
            assert lhs == pytest.approx(rhs, rel=1e-12)


def test_log_density_matches_density_where_representable():
    for alpha in (0.3, 0.7):
        sub = StableSubordinator(alpha, 2.0)
        for s in (0.5, 1.0, 5.0):
            assert stable_log_density(sub, s) == pytest.approx(
                math.log(stable_density(sub, s)), abs=1e-9
            )


def test_log_density_half_alpha_deep_tail():
    sub = StableSubordinator(0.5, 1.0)
    s = 1e-6
    expected = math.log(1.0 / (2.0 * math.sqrt(math.pi))) - 1.5 * math.log(s) - 1.0 / (4.0 * s)
    assert stable_log_density(sub, s) == pytest.approx(expected, rel=1e-12)


def test_laplace_check_examples():
    assert laplace_check(StableSubordinator(0.5, 1.0), 1.0) <= 1e-8
    assert laplace_check(StableSubordinator(0.5, 1.0), 1e-6) <= 1e-6
    assert laplace_check(StableSubordinator(0.7, 1.0), 1.0) <= 1e-6
    assert laplace_check(StableSubordinator(0.3, 2.0), 5.0) <= 1e-6


def test_subordinate_semigroup_reports_unmet_tolerance():
    from fracnash.subordinator import QuadratureError

    op = build(GeneratorSpec("cycle", 8))
    with pytest.raises(QuadratureError) as exc:
        subordinate_semigroup(op, 0.3, 10.0, tol=1e-10, max_nodes=96)
    assert exc.value.achieved > 1e-10
    assert exc.value.nodes <= 96


@pytest.mark.parametrize("alpha", [0.3, 0.7])
def test_laplace_check_grid(alpha):
    for t in (0.5, 2.0):
        for lam in (0.1, 1.0, 10.0):
            assert laplace_check(StableSubordinator(alpha, t), lam) <= 1e-6


def test_subordinate_semigroup_scalar_cases():
    one = build(GeneratorSpec("diagonal", eigenvalues=[1.0]))
    val = subordinate_semigroup(one, 0.5, 2.0)[0, 0]
    assert val == pytest.approx(math.exp(-2.0), abs=1e-9)
    zero = build(GeneratorSpec("diagonal", eigenvalues=[0.0]))
    for alpha in (0.3, 0.8):
        assert subordinate_semigroup(zero, alpha, 1.5)[0, 0] == pytest.approx(1.0, abs=1e-8)


def test_route_equivalence_cycle():
    op = build(GeneratorSpec("cycle", 16))
    for alpha in (0.3, 0.5, 0.7, 0.9):
        for t in (0.1, 1.0, 10.0):
            quad = subordinate_semigroup(op, alpha, t)
            spectral = fractional_semigroup(op, alpha, t)
            assert np.max(np.abs(quad - spectral)) <= 1e-6


def test_poisson_semigroup_properties():
    op = build(GeneratorSpec("cycle", 8))
    p1 = poisson_semigroup(op, 0.6)
    p2 = poisson_semigroup(op, 1.1)
    p3 = poisson_semigroup(op, 1.7)
    np.testing.assert_allclose(p1 @ p2, p3, atol=1e-8)
    spectral = apply_function(op, lambda x: math.exp(-1.7 * math.sqrt(x)))
    np.testing.assert_allclose(p3, spectral, atol=1e-8)
    diag4 = build(GeneratorSpec("diagonal", eigenvalues=[4.0]))
    assert poisson_semigroup(diag4, 1.0)[0, 0] == pytest.approx(math.exp(-2.0), abs=1e-10)
    assert poisson_semigroup(diag4, 1e-6)[0, 0] == pytest.approx(1.0, abs=1e-5)


def test_l1_contraction_markov():
    op = build(GeneratorSpec("cycle", 12))
    rng = np.random.default_rng(5)
    for alpha, t in ((0.4, 0.3), (0.7, 2.0)):
        mat = subordinate_semigroup(op, alpha, t)
        for _ in range(20):
            f = rng.standard_normal(12)
            assert op.space.norm(mat @ f, 1) <= op.space.norm(f, 1) + 1e-10
