"""Periodic orbit search by batched Newton and the lower estimate of S(f)."""

from dataclasses import dataclass, field
import itertools

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_positive, check_positive_int
from .core import (
    Classification,
    LyapunovVector,
    Spectrum,
    Word,
    classify_periodic,
    lyapunov_vector_periodic,
    spectrum,
    sum_positive_exponents,
)

NEWTON_TOL = 1e-10
MAX_STEP = 0.25
SINGULAR_COND = 1e12


@dataclass(frozen=True)
class PeriodicOrbit:
    """Periodic orbit with its cocycle and classification."""

    points: np.ndarray
    period: int
    cocycle: Word
    spectrum: Spectrum
    classification: Classification
    residual: float
    exponents: LyapunovVector = field(repr=False)

    @property
    def S(self):
        """Sum of the positive exponents."""
        return sum_positive_exponents(self.exponents)

    @property
    def hyperbolic(self):
        return self.classification.kind == "hyperbolic"

    def to_row(self):
        return {
            "period": self.period,
            "point": [float(v) for v in self.points[0]],
            "residual": float(self.residual),
            "classification": str(self.classification),
            "exponents": [float(v) for v in self.exponents.chis],
            "S": float(self.S),
        }


@dataclass
class ScanDiagnostics:
    seeds: int = 0
    converged: int = 0
    singular_seeds: int = 0
    non_minimal: int = 0


def _power_jacobian(model, X, tau):
    """``f^tau(X)`` up to integer shifts and its Jacobian for a batch of points."""
    d = model.dim
    D = np.broadcast_to(np.eye(d), (len(X), d, d)).copy()
    Y = X.copy()
    for _ in range(tau):
        Y = model.reduce(Y)
        D = model._jacobian(Y) @ D
        Y = model._evaluate(Y)
    return Y, D


def _newton(model, seeds, tau, newton_tol, max_iters, diagnostics):
    X = seeds.copy()
    d = model.dim
    singular = np.zeros(len(X), dtype=bool)
    res = np.full(len(X), np.inf)
    for _ in range(max_iters):
        Y, D = _power_jacobian(model, X, tau)
        F = model.displacement(Y, X)
        res = np.max(np.abs(F), axis=1)
        DF = D - np.eye(d)
        cond = np.linalg.cond(DF)
        bad = ~np.isfinite(cond) | (cond > SINGULAR_COND)
        singular |= bad
        step = np.empty_like(X)
        good = ~bad
        if good.any():
            step[good] = np.linalg.solve(DF[good], F[good][..., None])[..., 0]
        if bad.any():
            step[bad] = (np.linalg.pinv(DF[bad]) @ F[bad][..., None])[..., 0]
        size = np.max(np.abs(step), axis=1)
        scale = np.minimum(1.0, MAX_STEP / np.maximum(size, 1e-300))
        X = model.reduce(X - scale[:, None] * step)
        if np.all(size < 1e-15):
            break
    Y, _ = _power_jacobian(model, X, tau)
    res = model.distance(model.reduce(Y), X)
    diagnostics.singular_seeds += int(singular.sum())
    return X, res


def _grid(model, grid_per_dim):
    axis = (np.arange(grid_per_dim) + 0.5) / grid_per_dim
    return np.array(list(itertools.product(axis, repeat=model.dim)), dtype=float)


def _canonical(points):
    """Rotate the orbit so its lexicographically smallest point comes first."""
    keys = [tuple(np.round(p, 8)) for p in points]
    k = min(range(len(points)), key=lambda i: keys[i])
    return np.roll(points, -k, axis=0)


def _make_orbit(model, p0, tau, residual, tol):
    points, word = model.orbit_cocycle(p0, tau)
    points = _canonical(points[:-1])
    _, word = model.orbit_cocycle(points[0], tau)
    spec = spectrum(word.product())
    return PeriodicOrbit(
        points=points,
        period=tau,
        cocycle=word,
        spectrum=spec,
        classification=classify_periodic(spec, tol),
        residual=float(residual),
        exponents=lyapunov_vector_periodic(word),
    )


def find_periodic_orbits(model, tau, grid_per_dim=16, newton_tol=NEWTON_TOL, max_iters=60,
                         class_tol=1e-8, diagnostics=None):
    """Deduplicated orbits of minimal period ``tau`` found from a seed grid.

    Newton runs on ``F(x) = f^tau(x) - x`` with the difference wrapped to
    the torus.  Seeds with a singular ``DF`` take a least-squares step and
    are counted in ``diagnostics.singular_seeds``; they are still returned
    when they converge, so continua of degenerate orbits show up.

    Parameters
    ----------
    model : MapModel
    tau : int
    grid_per_dim : int
        Seeds per coordinate, cell centered.
    newton_tol : float
        Maximum accepted residual ``|f^tau(p) - p|`` in the torus metric.
    max_iters : int
    class_tol : float
        Tolerance for the unit-circle test in the classification.
    diagnostics : ScanDiagnostics, optional
        Filled with seed counts.

    Returns
    -------
    list of PeriodicOrbit
        Sorted by the first point of each orbit.
    """
    tau = check_positive_int(tau, "tau")
    grid_per_dim = check_positive_int(grid_per_dim, "grid_per_dim", minimum=2)
    check_positive(newton_tol, "newton_tol")
    diagnostics = ScanDiagnostics() if diagnostics is None else diagnostics
    seeds = _grid(model, grid_per_dim)
    diagnostics.seeds += len(seeds)
    X, res = _newton(model, seeds, tau, newton_tol, max_iters, diagnostics)
    ok = res <= newton_tol
    diagnostics.converged += int(ok.sum())
    X, res = X[ok], res[ok]
    # minimal period filter
    minimal = np.ones(len(X), dtype=bool)
    for d in range(1, tau):
        if tau % d == 0:
            Y = model.iterate(X, d)
            minimal &= model.distance(Y, X) > max(100 * newton_tol, 1e-8)
    diagnostics.non_minimal += int((~minimal).sum())
    X, res = X[minimal], res[minimal]

    dedup_tol = 10 * newton_tol
    kept_points = np.empty((0, model.dim))
    orbits = []
    order = np.lexsort(X.T[::-1]) if len(X) else []
    for idx in order:
        p = X[idx]
        if len(kept_points) and np.min(model.distance(kept_points, p)) <= dedup_tol:
            continue
        orbit = _make_orbit(model, p, tau, res[idx], class_tol)
        orbits.append(orbit)
        kept_points = np.vstack([kept_points, orbit.points])
    orbits.sort(key=lambda o: tuple(o.points[0]))
    return orbits


def estimate_S(model, max_period, grid_per_dim=16, tol=NEWTON_TOL, class_tol=1e-8):
    """Largest ``S(p)`` over hyperbolic orbits of minimal period ``<= max_period``.

    Returns
    -------
    (value, witness) : tuple
        ``(None, None)`` when no hyperbolic orbit was found, which signals an
        insufficient search rather than ``S = 0``.
    """
    max_period = check_positive_int(max_period, "max_period")
    best, witness = None, None
    for tau in range(1, max_period + 1):
        for orbit in find_periodic_orbits(model, tau, grid_per_dim, tol, class_tol=class_tol):
            if orbit.hyperbolic and (best is None or orbit.S > best):
                best, witness = orbit.S, orbit
    return best, witness


class PeriodicOrbitScanner(BaseEstimator):
    """Estimator wrapper around the periodic orbit scan.

    Parameters
    ----------
    model : MapModel
    max_period : int
    grid_per_dim : int
    newton_tol : float
    max_iters : int
    class_tol : float

    Attributes
    ----------
    orbits_ : list of PeriodicOrbit
    S_lower_ : float or None
    witness_ : PeriodicOrbit or None
    diagnostics_ : ScanDiagnostics
    """

    def __init__(self, model=None, max_period=1, grid_per_dim=16, newton_tol=NEWTON_TOL,
                 max_iters=60, class_tol=1e-8):
        self.model = model
        self.max_period = max_period
        self.grid_per_dim = grid_per_dim
        self.newton_tol = newton_tol
        self.max_iters = max_iters
        self.class_tol = class_tol

    def fit(self, X=None, y=None):
        """Scan every period up to ``max_period``; ``X`` is ignored."""
        max_period = check_positive_int(self.max_period, "max_period")
        self.diagnostics_ = ScanDiagnostics()
        self.orbits_ = []
        for tau in range(1, max_period + 1):
            self.orbits_.extend(find_periodic_orbits(
                self.model, tau, self.grid_per_dim, self.newton_tol, self.max_iters,
                self.class_tol, self.diagnostics_))
        hyperbolic = [o for o in self.orbits_ if o.hyperbolic]
        if hyperbolic:
            self.witness_ = max(hyperbolic, key=lambda o: o.S)
            self.S_lower_ = self.witness_.S
        else:
            self.witness_, self.S_lower_ = None, None
        return self
