import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symplectic_entropy.core import symplectic_residual
from symplectic_entropy.errors import DimensionError, DomainError
from symplectic_entropy.models import (
    MODEL_FAMILIES,
    build_model,
    cat_map,
    coupled_standard_maps,
    product_cat_map,
    snake_composed,
    standard_map,
    torus_automorphism,
)

MODELS = [
    standard_map(0.0),
    standard_map(1.2),
    standard_map(5.0),
    coupled_standard_maps(1.0, 1.5, 0.3),
    cat_map(),
    product_cat_map(),
    snake_composed(standard_map(0.5), 0.01, 3),
]


def fd_jacobian(f, x, h=1e-6):
    """Central differences of a torus map, unwrapped against the image of x."""
    y0 = f(x)
    cols = []
    for i in range(len(x)):
        e = np.zeros(len(x))
        e[i] = h
        plus, minus = f(x + e), f(x - e)
        plus = y0 + (plus - y0 + 0.5) % 1.0 - 0.5
        minus = y0 + (minus - y0 + 0.5) % 1.0 - 0.5
        cols.append((plus - minus) / (2 * h))
    return np.column_stack(cols)


def test_evaluate_examples():
    assert np.allclose(standard_map(0.0).evaluate([0.3, 0.2]), [0.5, 0.2])
    assert np.allclose(cat_map().evaluate([0.0, 0.0]), [0.0, 0.0])
    assert np.allclose(standard_map(1.0).evaluate([0.5, 0.0]), [0.5, 0.0], atol=1e-15)


def test_evaluate_batch_and_range():
    X = np.random.default_rng(0).random((50, 2))
    Y = standard_map(2.0).evaluate(X)
    assert Y.shape == (50, 2)
    assert np.all((Y >= 0) & (Y < 1))


def test_jacobian_examples():
    assert np.allclose(cat_map().jacobian([0.3, 0.7]), [[2, 1], [1, 1]])
    k = 1.7
    assert np.allclose(standard_map(k).jacobian([0.0, 0.0]), [[1 + k, 1], [k, 1]])
    J = coupled_standard_maps(1.0, 2.0, 0.0).jacobian([0.1, 0.2, 0.3, 0.4])
    # coordinates (x1, x2, y1, y2): the two planes decouple
    assert np.allclose(J[np.ix_([0, 2], [1, 3])], 0)
    assert np.allclose(J[np.ix_([0, 2], [0, 2])], standard_map(1.0).jacobian([0.1, 0.3]))
    assert np.allclose(J[np.ix_([1, 3], [1, 3])], standard_map(2.0).jacobian([0.2, 0.4]))


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
def test_jacobian_matches_finite_differences(model):
    rng = np.random.default_rng(1)
    for x in rng.random((5, model.dim)):
        assert np.allclose(model.jacobian(x), fd_jacobian(model.evaluate, x), atol=1e-5)


@pytest.mark.parametrize("model", MODELS, ids=lambda m: m.describe())
def test_orbit_cocycle_product_is_power_jacobian(model):
    x = np.random.default_rng(2).random(model.dim)
    for n in (1, 4, 10):
        orbit, word = model.orbit_cocycle(x, n)
        assert orbit.shape == (n + 1, model.dim)
        assert len(word) == n
        # small step: derivatives of f^10 reach 1e5 for the chaotic models
        fd = fd_jacobian(lambda z: model.iterate(z, n), x, h=1e-10)
        assert np.allclose(word.product(), fd, rtol=1e-4, atol=1e-4 * max(1.0, np.abs(fd).max()))


def test_orbit_examples():
    orbit, word = cat_map().orbit_cocycle([0.0, 0.0], 3)
    assert len(word) == 3
    assert all(np.allclose(A, [[2, 1], [1, 1]]) for A in word)
    orbit = standard_map(0.0).orbit([0.3, 0.2], 2)
    assert np.allclose(orbit, [[0.3, 0.2], [0.5, 0.2], [0.7, 0.2]])


@given(st.floats(0, 1, exclude_max=True), st.floats(0, 1, exclude_max=True), st.floats(-6, 6))
@settings(max_examples=50, deadline=None)
def test_standard_map_jacobian_symplectic(x, y, k):
    assert symplectic_residual(standard_map(k).jacobian([x, y])) < 1e-12


def test_torus_automorphism_checks():
    with pytest.raises(DomainError):
        torus_automorphism([[2, 0], [0, 1]])
    with pytest.raises((DomainError, ValueError)):
        torus_automorphism([[1.5, 0], [0, 2 / 3]])
    with pytest.raises(DimensionError):
        standard_map(1.0).evaluate([0.1, 0.2, 0.3])


def test_product_cat_map_is_block_product():
    M = product_cat_map().jacobian(np.zeros(4))
    assert np.allclose(M[np.ix_([0, 2], [0, 2])], [[2, 1], [1, 1]])
    assert np.allclose(M[np.ix_([1, 3], [1, 3])], [[2, 1], [1, 1]])


def test_distance_wraps():
    m = standard_map(1.0)
    assert m.distance([0.01, 0.5], [0.99, 0.5]) == pytest.approx(0.02)


def test_build_model_families():
    assert set(MODEL_FAMILIES) >= {"standard_map", "coupled_standard_maps", "torus_automorphism", "cat",
                                   "cat_product", "identity"}
    assert isinstance(build_model({"family": "standard_map", "k": 1.2}), type(standard_map(1.2)))
    ident = build_model({"family": "identity", "dim": 4})
    assert ident.dim == 4
    assert np.allclose(ident.evaluate([0.1, 0.2, 0.3, 0.4]), [0.1, 0.2, 0.3, 0.4])
    composed = build_model({"family": "snake_composed", "base": {"family": "cat"}, "amplitude": 0.01,
                            "frequency": 3})
    assert composed.dim == 2
    with pytest.raises(DomainError):
        build_model({"family": "nope"})
