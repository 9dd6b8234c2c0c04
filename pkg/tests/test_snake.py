import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from symplectic_entropy.core import symplectic_residual
from symplectic_entropy.entropy import TransitionMatrixModel, shift_entropy
from symplectic_entropy.errors import CertificateRefused, ConstructionError, DomainError
from symplectic_entropy.snake import (
    SnakeShear,
    afirma_bounds,
    amplitude_for,
    build_horseshoe,
    build_tangency_model,
    certify_against_estimator,
    choose_t,
    find_N0,
    homoclinic_grid,
    restricted_entropy,
    shear_c1_distance,
    snake_shear_map,
)


@pytest.fixture(scope="module")
def model1():
    return build_tangency_model(1, [2.0], T=1, a=0.1)


def roots_by_bisection(f, lo, hi, samples=20001):
    x = np.linspace(lo, hi, samples)
    v = f(x)
    roots = [x[i] for i in np.flatnonzero(v == 0)]
    for i in np.flatnonzero(v[:-1] * v[1:] < 0):
        roots.append(brentq(f, x[i], x[i + 1]))
    return np.sort(roots)


def test_shear_images():
    s = SnakeShear(0.01, 3, 0.1)
    X = np.array([[0.03, 0.0], [0.0, 0.2]])
    img, jac = snake_shear_map(s, X)
    assert img[0, 1] == pytest.approx(0.01 * np.sin(0.03 * np.pi * 3 / 0.2))
    assert np.allclose(img[1], [0.0, 0.2])
    assert np.allclose(np.linalg.det(jac), 1.0)


def test_shear_jacobian_symplectic_random_points():
    rng = np.random.default_rng(0)
    for n in (1, 2, 3):
        s = SnakeShear(0.02, 5, 0.1, n)
        D = s.jacobian(rng.uniform(-0.1, 0.1, (1000, 2 * n)))
        assert max(symplectic_residual(M) for M in D) < 1e-14


def test_c1_distance():
    for N in (1, 3, 11):
        A = amplitude_for(0.1, 0.05, N)
        assert shear_c1_distance(SnakeShear(A, N, 0.1)) == pytest.approx(0.05)
    assert shear_c1_distance(SnakeShear(0.0, 3, 0.1)) == 0.0
    d3 = shear_c1_distance(SnakeShear(0.01, 3, 0.1))
    assert shear_c1_distance(SnakeShear(0.01, 7, 0.1)) == pytest.approx(d3 * 7 / 3)


def test_shear_rejects_even_frequency():
    with pytest.raises(ValueError):
        SnakeShear(0.01, 4, 0.1)


def test_homoclinic_grid_examples():
    grid = homoclinic_grid(SnakeShear(0.01, 3, 1.0))
    assert np.allclose(grid[:, 0], [-2 / 3, 0, 2 / 3])
    assert np.allclose(grid[:, 1], 0)
    roots = roots_by_bisection(lambda x: np.sin(x * np.pi * 3 / 2), -1, 1)
    assert np.allclose(grid[:, 0], roots, atol=1e-12)
    assert len(homoclinic_grid(SnakeShear(0.01, 1, 1.0))) == 1
    grid2 = homoclinic_grid(SnakeShear(0.01, 3, 1.0, 2))
    assert len(grid2) == 9
    assert {tuple(np.round(p[:2], 12)) for p in grid2} == {
        (round(u, 12), round(v, 12)) for u in (-2 / 3, 0, 2 / 3) for v in (-2 / 3, 0, 2 / 3)}


@given(st.integers(0, 30).map(lambda k: 2 * k + 1), st.integers(1, 2))
@settings(max_examples=30, deadline=None)
def test_homoclinic_grid_points_stay_on_disc(N, n):
    s = SnakeShear(0.01, N, 0.1, n)
    grid = homoclinic_grid(s)
    assert len(grid) == N ** n
    assert np.max(np.abs(s.evaluate(grid)[:, n:])) < 1e-15


def test_tangency_model_geometry(model1):
    # points of the stable disc converge to the fixed point at rate 1/2
    Z = np.array([[0.0, 0.15], [0.0, 0.2]])
    for _ in range(5):
        W = model1.step(Z)
        assert np.allclose(W[:, 1], Z[:, 1] / 2)
        Z = W
    # the connector maps the unstable disc onto the stable disc
    Du = np.column_stack([np.linspace(0.4, 0.6, 11), np.zeros(11)])
    Ds = model1.connector(Du)
    assert np.allclose(Ds[:, 0], 0) and np.allclose(Ds[:, 1], np.linspace(0.05, 0.25, 11))
    # tangency: the connector maps the unstable direction to the stable one on D^u
    DG = model1.connector_jacobian(Du)
    assert np.allclose(DG @ [1.0, 0.0], [[0.0, 1.0]] * 11)
    assert max(symplectic_residual(M) for M in DG) < 1e-10


def test_tangency_model_rejects_large_discs():
    with pytest.raises(ConstructionError):
        build_tangency_model(1, [2.0], a=0.2)
    with pytest.raises(DomainError):
        build_tangency_model(1, [0.5])


def test_chart_round_trip(model1):
    Z = np.random.default_rng(1).random((20, 2))
    assert np.allclose(model1.chart_inverse(model1.chart(Z)), Z)
    assert np.allclose(model1.connector_inverse(model1.connector(Z)), Z)


def test_choose_t_closed_form(model1):
    for N in (3, 7, 21, 101):
        A = amplitude_for(0.1, 0.05, N)
        assert choose_t(model1, A) == int(np.ceil(np.log2(4 * (model1.b + model1.a) / A)))


def test_choose_t_monotone_in_sigma():
    A = amplitude_for(0.1, 0.05, 9)
    slow = build_tangency_model(1, [2.0])
    fast = build_tangency_model(1, [4.0])
    assert choose_t(fast, A) <= choose_t(slow, A)


def test_choose_t_threshold(model1):
    threshold = 4 * (model1.b + model1.a)
    assert choose_t(model1, threshold * (1 - 1e-9)) == 1
    with pytest.raises(DomainError):
        choose_t(model1, threshold)


def test_afirma_single_and_table(model1):
    K, table = afirma_bounds(model1, [5])
    assert K == pytest.approx(max(table[0]["K_lower"], table[0]["K_upper"]))
    K, table = afirma_bounds(model1, range(3, 40, 2))
    ts = [row["t"] for row in table]
    assert ts == sorted(ts)
    for row in table:
        assert row["lower"] <= K * row["A"] * (1 + 1e-12)
        assert row["A"] <= K * row["upper"] * (1 + 1e-12)


def test_horseshoe_n1_regression(model1):
    cert = build_horseshoe(model1, 3, delta=0.05)
    # frozen from the pipeline: t = 12 for N = 3, delta = 0.05
    assert cert.t == 12
    assert len(cert.components) == 3
    assert cert.entropy == pytest.approx(np.log(3) / 13, abs=1e-15)
    assert shift_entropy(cert.transition_matrix()) / cert.return_time == pytest.approx(cert.entropy, abs=1e-12)


def test_horseshoe_components_are_disjoint_and_inside(model1):
    cert = build_horseshoe(model1, 5)
    lo, hi = model1.rectangle(cert.t)
    xs = sorted((c[0][0], c[1][0]) for c in cert.components)
    assert all(lo[0] < a < b < hi[0] for a, b in xs)
    assert all(b1 < a2 for (_, b1), (a2, _) in zip(xs, xs[1:]))


def test_horseshoe_components_cross(model1):
    cert = build_horseshoe(model1, 3)
    shear = SnakeShear(cert.A, 3, model1.a)
    R_lo, R_hi = model1.rectangle(cert.t)
    for lo, hi in cert.components:
        ys = np.linspace(R_lo[1], R_hi[1], 50)
        left = np.column_stack([np.full(50, lo[0]), ys])
        right = np.column_stack([np.full(50, hi[0]), ys])
        (img_l, ok_l), (img_r, ok_r) = model1.return_map(left, cert.t, shear), model1.return_map(right, cert.t, shear)
        assert ok_l.all() and ok_r.all()
        # the two faces leave R through opposite unstable sides
        below = lambda img: np.all(img[:, 0] < R_lo[0])
        above = lambda img: np.all(img[:, 0] > R_hi[0])
        assert (below(img_l) and above(img_r)) or (above(img_l) and below(img_r))
        # stable faces land strictly inside in the stable coordinate
        for y in (R_lo[1], R_hi[1]):
            face = np.column_stack([np.linspace(lo[0], hi[0], 50), np.full(50, y)])
            img, ok = model1.return_map(face, cert.t, shear)
            assert ok.all() and np.all((img[:, 1] > R_lo[1]) & (img[:, 1] < R_hi[1]))


def test_horseshoe_trivial_and_n2():
    m1 = build_tangency_model(1, [2.0])
    cert = build_horseshoe(m1, 1)
    assert len(cert.components) == 1 and cert.entropy == 0.0
    report = certify_against_estimator(cert, m1)
    assert report["consistent"] and report["estimator_entropy"] == 0.0
    m2 = build_tangency_model(2, [2.0, 3.0])
    cert2 = build_horseshoe(m2, 3)
    assert len(cert2.components) == 9
    assert cert2.entropy == pytest.approx(2 * np.log(3) / cert2.return_time)


def test_certified_entropy_grows_with_N(model1):
    values = [build_horseshoe(model1, N).entropy for N in (3, 9, 27)]
    assert values == sorted(values)
    assert values[-1] < np.log(2)


def test_restricted_estimator_reproduces_certificate(model1):
    cert = build_horseshoe(model1, 3)
    value, est = restricted_entropy(model1, cert, depth=4)
    assert abs(value - cert.entropy) < 0.1 / cert.return_time
    assert list(est.counts[0][1:]) == [3, 9, 27, 81]


def test_certify_report(model1):
    cert = build_horseshoe(model1, 3)
    report = certify_against_estimator(cert, model1, eps=0.01)
    assert report["porradaa"] is False
    assert report["eps_min"] == pytest.approx(np.log(2) - cert.entropy)
    assert not report["flag_undercount"]


def test_find_N0_meets_bound(model1):
    eps = 0.62
    N0 = find_N0(model1, 0.05, eps)
    cert = build_horseshoe(model1, N0)
    assert cert.entropy > np.log(2) - eps
    if N0 > 1:
        assert build_horseshoe(model1, N0 - 2).entropy <= np.log(2) - eps


def test_refusal_carries_evidence(model1):
    # an amplitude beyond the connector's reach cannot produce crossings
    with pytest.raises((CertificateRefused, DomainError)):
        build_horseshoe(model1, 3, delta=40.0)


def test_transition_matrix_is_full_shift(model1):
    cert = build_horseshoe(model1, 5)
    assert np.array_equal(cert.transition_matrix().matrix, TransitionMatrixModel.full_shift(5).matrix)
