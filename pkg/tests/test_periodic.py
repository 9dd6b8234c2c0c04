import numpy as np
import pytest
from sklearn.base import clone

from symplectic_entropy.models import build_model, cat_map, product_cat_map, standard_map
from symplectic_entropy.periodic import (
    PeriodicOrbitScanner,
    ScanDiagnostics,
    estimate_S,
    find_periodic_orbits,
)

LOG_GOLDEN2 = np.log((3 + np.sqrt(5)) / 2)


def test_cat_fixed_point_is_unique():
    orbits = find_periodic_orbits(cat_map(), 1)
    assert len(orbits) == 1
    assert np.allclose(orbits[0].points[0], [0, 0], atol=1e-10)
    assert orbits[0].hyperbolic
    assert orbits[0].S == pytest.approx(LOG_GOLDEN2, abs=1e-10)


@pytest.mark.parametrize("tau", [2, 3])
def test_cat_periodic_counts(tau):
    # |det(A^tau - I)| points of period tau; orbits of minimal period tau
    A = np.array([[2, 1], [1, 1]])
    fix = round(abs(np.linalg.det(np.linalg.matrix_power(A, tau) - np.eye(2))))
    minimal_points = fix - 1
    orbits = find_periodic_orbits(cat_map(), tau, grid_per_dim=24)
    assert len(orbits) * tau == minimal_points
    assert all(o.period == tau and o.hyperbolic for o in orbits)


def test_standard_map_fixed_points():
    k = 1.2
    orbits = find_periodic_orbits(standard_map(k), 1)
    points = sorted(tuple(np.round(o.points[0], 8)) for o in orbits)
    assert points == [(0.0, 0.0), (0.5, 0.0)]
    by_x = {round(o.points[0][0], 6): o for o in orbits}
    # trace criterion: tr = 2 + k at x = 0, 2 - k at x = 1/2
    assert by_x[0.0].hyperbolic
    assert str(by_x[0.5].classification) == "m_elliptic(1)"
    root = (2 + k + np.sqrt((2 + k) ** 2 - 4)) / 2
    assert by_x[0.0].S == pytest.approx(np.log(root), abs=1e-10)


def test_integrable_case_reports_degenerate_orbits():
    diag = ScanDiagnostics()
    orbits = find_periodic_orbits(standard_map(0.0), 1, grid_per_dim=8, diagnostics=diag)
    assert orbits
    assert all(o.classification.kind == "degenerate" for o in orbits)
    assert diag.singular_seeds > 0


def test_estimate_S_examples():
    value, witness = estimate_S(cat_map(), 1)
    assert value == pytest.approx(LOG_GOLDEN2, abs=1e-10)
    assert np.allclose(witness.points[0], 0, atol=1e-10)
    value, _ = estimate_S(product_cat_map(), 1, grid_per_dim=6)
    assert value == pytest.approx(2 * LOG_GOLDEN2, abs=1e-6)
    value, _ = estimate_S(standard_map(1.2), 1)
    assert value == pytest.approx(np.log((3.2 + np.sqrt(3.2 ** 2 - 4)) / 2), abs=1e-10)


def test_estimate_S_without_hyperbolic_orbit():
    assert estimate_S(build_model({"family": "identity"}), 1, grid_per_dim=4) == (None, None)


def test_product_witness_invariants():
    _, witness = estimate_S(product_cat_map(), 1, grid_per_dim=6)
    assert witness.exponents.pairing_residual() < 1e-7
    assert witness.exponents.zero_sum_residual() < 1e-7


def test_orbit_points_are_an_orbit():
    model = standard_map(2.0)
    for orbit in find_periodic_orbits(model, 3, grid_per_dim=16):
        images = model.evaluate(orbit.points)
        assert np.max(model.distance(images, np.roll(orbit.points, -1, axis=0))) < 1e-9
        assert orbit.residual < 1e-10


def test_scanner_estimator_api():
    scanner = PeriodicOrbitScanner(cat_map(), max_period=2)
    params = scanner.get_params()
    assert params["max_period"] == 2
    fitted = scanner.fit()
    assert fitted is scanner
    assert scanner.S_lower_ == pytest.approx(LOG_GOLDEN2, abs=1e-10)
    assert {o.period for o in scanner.orbits_} == {1, 2}
    other = clone(scanner).set_params(max_period=1)
    assert other.max_period == 1
    assert not hasattr(other, "orbits_")


def test_orbit_row_serializes():
    row = find_periodic_orbits(cat_map(), 1)[0].to_row()
    assert row["classification"] == "hyperbolic"
    assert row["period"] == 1
