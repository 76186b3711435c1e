import numpy as np
import pytest

from fracnash.generators import GeneratorSpec, build, dirichlet_energy
from fracnash.spectral import heat_semigroup, quadratic_form


def test_cycle_spectrum_closed_form():
    op = build(GeneratorSpec("cycle", 4))
    np.testing.assert_allclose(op.eigenvalues, [0.0, 2.0, 2.0, 4.0], atol=1e-10)


def test_ou_spectrum():
    op = build(GeneratorSpec("ou", 4))
    np.testing.assert_allclose(op.eigenvalues, [0.0, 1.0, 2.0, 3.0])


def test_diagonal_kind():
    op = build(GeneratorSpec("diagonal", eigenvalues=[0.0, 5.0]))
    np.testing.assert_allclose(op.matrix(), np.diag([0.0, 5.0]), atol=1e-12)


def test_lattice_scaling():
    op = build(GeneratorSpec("path", 3, h=0.5))
    op1 = build(GeneratorSpec("path", 3, h=1.0))
    np.testing.assert_allclose(op.eigenvalues, 4.0 * op1.eigenvalues, atol=1e-9)


def test_invalid_specs():
    with pytest.raises(ValueError):
        GeneratorSpec("hexagon", 4)
    with pytest.raises(ValueError):
        GeneratorSpec("cycle", 1)
    with pytest.raises(ValueError):
        GeneratorSpec("cycle", 8, h=0.0)
    with pytest.raises(ValueError):
        GeneratorSpec("diagonal", eigenvalues=[-1.0])


def test_dirichlet_energy_examples():
    spec = GeneratorSpec("path", 2)
    assert dirichlet_energy(spec, [0.0, 1.0]) == pytest.approx(1.0)
    assert dirichlet_energy(spec, [3.0, 3.0]) == pytest.approx(0.0)
    with pytest.raises(ValueError, match="graph kind"):
        dirichlet_energy(GeneratorSpec("ou", 4), [1.0] * 4)


@pytest.mark.parametrize("kind,size", [("cycle", 8), ("path", 7), ("grid2d", 3)])
def test_dirichlet_energy_matches_quadratic_form(kind, size):
    spec = GeneratorSpec(kind, size, h=1.0)
    op = build(spec)
    rng = np.random.default_rng(11)
    for _ in range(5):
        f = rng.standard_normal(op.n)
        assert dirichlet_energy(spec, f) == pytest.approx(quadratic_form(op, 1.0, f), abs=1e-9)


@pytest.mark.parametrize("kind,size", [("cycle", 6), ("path", 5), ("grid2d", 3)])
def test_graph_laplacians_annihilate_constants(kind, size):
    op = build(GeneratorSpec(kind, size))
    assert op.eigenvalues[0] == pytest.approx(0.0, abs=1e-10)
    ones = np.ones(op.n)
    assert quadratic_form(op, 1.0, ones) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("kind,size", [("cycle", 8), ("path", 6), ("grid2d", 3)])
def test_markov_property_witness(kind, size):
    op = build(GeneratorSpec(kind, size))
    for t in (0.05, 0.5, 5.0):
        k = heat_semigroup(op, t)
        assert np.min(k) >= -1e-12
        np.testing.assert_allclose(k @ np.ones(op.n), np.ones(op.n), atol=1e-9)
