"""Local model of a full homoclinic tangency, the snake shear and horseshoe certificates.

Model coordinates are ``(x, y)`` with ``x`` unstable and ``y`` stable for
the hyperbolic fixed point ``p = 0``.  Near ``p`` the map is the linear
``L = diag(sigma, 1/sigma)``, counted as ``tau`` time units.  A connector
``G`` counted as ``T`` time units carries the unstable disc
``D^u = {(b + xi, 0)}`` onto the stable disc ``D^s = {(0, c + xi)}``,
``|xi_i| <= a``, tangent spaces included, so every point of ``D^s`` is
homoclinic and the tangency is full.

The snake acts in the chart ``psi(x, y) = (y - c, -x)`` that straightens
``D^s`` onto ``[-a, a]^n x {0}``.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import brentq

from ._validation import check_odd, check_positive, check_positive_int
from .core import standard_form
from .entropy import (
    EntropyEstimate,
    TransitionMatrixModel,
    check_porradaa,
    count_table,
    entropy_from_counts,
    horseshoe_lower_bound,
    shift_entropy,
)
from .errors import BudgetError, CertificateRefused, ConstructionError, DimensionError, DomainError

T_BUDGET = 10 ** 6
FACE_SAMPLES = 100
CROSSING_PAD = 0.05


@dataclass(frozen=True)
class SnakeShear:
    """``(X, Y) -> (X, Y + A sin(X pi N / 2a))`` componentwise."""

    amplitude: float
    N: int
    a: float
    n: int = 1

    def __post_init__(self):
        check_odd(self.N)
        check_positive(self.a, "a")
        check_positive_int(self.n, "n")
        if not np.isfinite(self.amplitude) or self.amplitude < 0:
            raise DomainError(f"amplitude must be >= 0, got {self.amplitude}")

    @property
    def frequency(self):
        return np.pi * self.N / (2.0 * self.a)

    def _check(self, points):
        Z = np.asarray(points, dtype=float)
        if Z.shape[-1] != 2 * self.n:
            raise DimensionError(f"points must have {2 * self.n} coordinates, got {Z.shape[-1]}")
        return Z

    def evaluate(self, points):
        Z = self._check(points).copy()
        n = self.n
        Z[..., n:] += self.amplitude * np.sin(self.frequency * Z[..., :n])
        return Z

    def jacobian(self, points):
        Z = self._check(points)
        n = self.n
        D = np.broadcast_to(np.eye(2 * n), Z.shape[:-1] + (2 * n, 2 * n)).copy()
        idx = np.arange(n)
        D[..., n + idx, idx] = self.amplitude * self.frequency * np.cos(self.frequency * Z[..., :n])
        return D


def snake_shear_map(shear, points):
    """Images and exact Jacobians of the snake shear at ``points``."""
    return shear.evaluate(points), shear.jacobian(points)


def shear_c1_distance(shear):
    """``sup |D Theta - I| = A pi N / (2a)``."""
    return shear.amplitude * np.pi * shear.N / (2.0 * shear.a)


def amplitude_for(a, delta, N, alpha=1.0):
    """Amplitude ``2 a alpha delta / (pi N)`` giving C^1 distance ``alpha delta``."""
    return 2.0 * a * alpha * delta / (np.pi * N)


def homoclinic_grid(shear):
    """Points of ``Theta(D) & D`` for ``D = [-a, a]^n x {0}``: an ``N^n`` grid."""
    N, n, a = shear.N, shear.n, shear.a
    # sin(x pi N / 2a) = 0 with |x| <= a  <=>  x = 2ak/N with |2k| <= N
    ks = np.arange(-(N // 2), N // 2 + 1)
    axis = 2.0 * a * ks / N
    mesh = np.meshgrid(*[axis] * n, indexing="ij")
    X = np.column_stack([m.ravel() for m in mesh])
    return np.hstack([X, np.zeros_like(X)])


@dataclass(frozen=True)
class TangencyModel:
    """Piecewise symplectic model with a flattened full homoclinic tangency.

    Attributes
    ----------
    multipliers : ndarray (n,)
        Unstable multipliers ``sigma_i > 1`` of the fixed point.
    T, tau : int
        Time units of one connector step and one linear step.
    a, b, c : float
        Disc radius, center of ``D^u`` on the unstable axis and center of
        ``D^s`` on the stable axis.
    kappa : float
        Curvature of the connector shear, which vanishes to second order on
        ``D^u``.
    """

    multipliers: np.ndarray
    T: int = 1
    a: float = 0.1
    b: float = 0.5
    c: float = 0.15
    kappa: float = 0.5
    tau: int = 1

    def __post_init__(self):
        s = np.asarray(self.multipliers, dtype=float).ravel()
        s.setflags(write=False)
        object.__setattr__(self, "multipliers", s)

    @property
    def n(self):
        return len(self.multipliers)

    @property
    def alpha(self):
        # operator norm of the chart derivative, which is a rotation
        return 1.0

    @property
    def beta(self):
        return 1.0

    @property
    def connector_y_bound(self):
        return (self.c + self.a) / self.multipliers

    def linear_matrix(self):
        return np.diag(np.concatenate([self.multipliers, 1.0 / self.multipliers]))

    def chart(self, Z):
        Z = np.asarray(Z, dtype=float)
        n = self.n
        return np.concatenate([Z[..., n:] - self.c, -Z[..., :n]], axis=-1)

    def chart_inverse(self, W):
        W = np.asarray(W, dtype=float)
        n = self.n
        return np.concatenate([-W[..., n:], W[..., :n] + self.c], axis=-1)

    def in_connector(self, Z):
        Z = np.asarray(Z, dtype=float)
        n = self.n
        x, y = Z[..., :n], Z[..., n:]
        return np.all((np.abs(x - self.b) <= self.a) & (np.abs(y) <= self.connector_y_bound), axis=-1)

    def connector(self, Z):
        Z = np.asarray(Z, dtype=float)
        n = self.n
        x, y = Z[..., :n], Z[..., n:]
        return np.concatenate([-y, x - self.b + self.c + self.kappa * y ** 2], axis=-1)

    def connector_jacobian(self, Z):
        Z = np.asarray(Z, dtype=float)
        n = self.n
        y = Z[..., n:]
        D = np.zeros(Z.shape[:-1] + (2 * n, 2 * n))
        idx = np.arange(n)
        D[..., idx, n + idx] = -1.0
        D[..., n + idx, idx] = 1.0
        D[..., n + idx, n + idx] = 2.0 * self.kappa * y
        return D

    def connector_inverse(self, W):
        W = np.asarray(W, dtype=float)
        n = self.n
        y = -W[..., :n]
        x = W[..., n:] + self.b - self.c - self.kappa * y ** 2
        return np.concatenate([x, y], axis=-1)

    def lipschitz(self):
        """Sup of ``|DG|`` over the connector box."""
        y = self.connector_y_bound
        worst = np.concatenate([np.zeros(self.n), y])
        return float(np.linalg.norm(self.connector_jacobian(worst), 2))

    def snake(self, shear, Z):
        """Snake shear conjugated by the chart."""
        return self.chart_inverse(shear.evaluate(self.chart(Z)))

    def step(self, Z, shear=None):
        """One step: connector (plus snake) on the connector box, linear elsewhere."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        inside = self.in_connector(Z)
        out = Z * np.concatenate([self.multipliers, 1.0 / self.multipliers])
        if inside.any():
            W = self.connector(Z[inside])
            out[inside] = W if shear is None else self.snake(shear, W)
        return out

    def step_jacobian(self, Z, shear=None):
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        inside = self.in_connector(Z)
        D = np.broadcast_to(self.linear_matrix(), (len(Z), 2 * self.n, 2 * self.n)).copy()
        if inside.any():
            DG = self.connector_jacobian(Z[inside])
            if shear is not None:
                # chart derivative is the constant standard form
                J = standard_form(self.n)
                W = self.chart(self.connector(Z[inside]))
                DG = (-J) @ shear.jacobian(W) @ J @ DG
            D[inside] = DG
        return D

    def rectangle(self, t):
        """Box ``R``: ``x`` in ``(b +- a) / sigma^t``, ``y`` in ``c +- a``."""
        s = self.multipliers ** t
        lo = np.concatenate([(self.b - self.a) / s, np.full(self.n, self.c - self.a)])
        hi = np.concatenate([(self.b + self.a) / s, np.full(self.n, self.c + self.a)])
        return lo, hi

    def return_map(self, Z, t, shear=None):
        """``t`` linear steps then one connector step by iterating :meth:`step`.

        Returns the images and a mask of points that took exactly that path.
        """
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        ok = np.ones(len(Z), dtype=bool)
        for _ in range(t):
            ok &= ~self.in_connector(Z)
            Z = self.step(Z, shear)
        ok &= self.in_connector(Z)
        return self.step(Z, shear), ok

    def return_time(self, t):
        return self.T + self.tau * t

    def describe(self):
        return {"n": self.n, "multipliers": [float(s) for s in self.multipliers], "T": self.T,
                "tau": self.tau, "a": self.a, "b": self.b, "c": self.c, "kappa": self.kappa}


def build_tangency_model(n, multipliers, T=1, a=0.1, b=0.5, c=0.15, kappa=0.5, tau=1):
    """Tangency model with geometric consistency checks.

    Raises
    ------
    ConstructionError
        If the discs touch the fixed point or the connector box meets the
        linear orbit segments from the stable disc, which happens when ``a``
        is too large.
    """
    n = check_positive_int(n, "n")
    s = np.broadcast_to(np.asarray(multipliers, dtype=float), (n,)).copy()
    if np.any(s <= 1):
        raise DomainError("multipliers must exceed 1")
    T = check_positive_int(T, "T")
    tau = check_positive_int(tau, "tau")
    a = check_positive(a, "a")
    if b - a <= 0 or c - a <= 0:
        raise ConstructionError(f"discs of radius {a} reach the fixed point; shrink a")
    # the last linear iterate before the connector must stay out of the connector box
    if np.any((b + a) / s >= b - a):
        raise ConstructionError(f"connector box overlaps the linear neighborhood; shrink a (a={a})")
    if c + a >= b - a:
        raise ConstructionError("stable disc reaches the connector box; shrink a")
    return TangencyModel(multipliers=s, T=T, a=a, b=b, c=c, kappa=kappa, tau=tau)


def choose_t(model, A, budget=T_BUDGET):
    """Smallest ``t >= 1`` with both closeness conditions.

    First, the pulled-back unstable disc ``L^{-t}(D^u)`` lies within ``A/4``
    of the stable axis.  Second, ``sigma_min^t l_A >= l_D`` with
    ``l_A = A beta / (4 lambda^T)`` and ``l_D = c + a``.  Both are checked by
    iterating ``L`` in log scale.
    """
    A = check_positive(A, "A")
    log_sigma = np.log(model.multipliers)
    log_far = np.log(model.b + model.a)  # largest |x| on D^u
    log_quarter = np.log(A / 4.0)
    log_lA = np.log(A * model.beta / (4.0 * model.lipschitz() ** model.T))
    log_lD = np.log(model.c + model.a)
    x = np.full(model.n, log_far)
    grow = log_lA
    if np.max(x) <= log_quarter and grow >= log_lD:
        raise DomainError(f"amplitude {A} is too large: t = 0 already satisfies both conditions")
    for t in range(1, budget + 1):
        x = x - model.tau * log_sigma
        grow = grow + model.tau * log_sigma.min()
        if np.max(x) <= log_quarter and grow >= log_lD:
            return t
    raise BudgetError(f"no t <= {budget} for amplitude {A}", best=budget)


def _restricted_norms(model, t):
    """``|Df^{t tau}|E^u|``, ``|Df^{-t tau}|E^s|``, ``|Df^{-t tau}|E^u|``, ``|Df^{t tau}|E^s|``."""
    n = model.n
    Lt = np.linalg.matrix_power(model.linear_matrix(), t * model.tau)
    Lmt = np.linalg.matrix_power(np.diag(1.0 / np.diag(model.linear_matrix())), t * model.tau)
    u, s = slice(0, n), slice(n, 2 * n)
    return (np.linalg.norm(Lt[u, u], 2), np.linalg.norm(Lmt[s, s], 2),
            np.linalg.norm(Lmt[u, u], 2), np.linalg.norm(Lt[s, s], 2))


def afirma_bounds(model, N_list, delta=0.05):
    """Smallest single ``K`` bracketing ``A(N)`` for every ``N``.

    For each ``N``: ``A = 2 a alpha delta / (pi N)``, ``t = choose_t`` and
    the brackets ``min(|Df^t|E^u|^-1, |Df^-t|E^s|^-1) <= K A`` and
    ``A <= K max(|Df^-t|E^u|, |Df^t|E^s|)``.

    Returns
    -------
    K : float
    table : list of dict
        Per ``N``: ``A``, ``t``, the two bracket values and the ``K`` they
        require.
    """
    table = []
    for N in N_list:
        N = check_odd(N)
        A = amplitude_for(model.a, delta, N, model.alpha)
        t = choose_t(model, A)
        fu, bs, bu, fs = _restricted_norms(model, t)
        lower = min(1.0 / fu, 1.0 / bs)
        upper = max(bu, fs)
        table.append({"N": N, "A": A, "t": t, "lower": lower, "upper": upper,
                      "K_lower": lower / A, "K_upper": A / upper})
    K = max(max(row["K_lower"], row["K_upper"]) for row in table) if table else float("nan")
    return K, table


@dataclass
class HorseshoeCertificate:
    """Certified horseshoe of the return map ``snake o G o L^t`` on ``R``.

    ``components`` lists the crossing boxes as ``(lo, hi)`` corner pairs in
    model coordinates; ``evidence`` summarizes the boundary checks.
    """

    N: int
    n: int
    T: int
    tau: int
    t: int
    A: float
    delta: float
    rectangle: tuple
    components: list
    entropy: float
    K: float
    evidence: list = field(default_factory=list, repr=False)
    model: dict = field(default_factory=dict, repr=False)

    @property
    def symbols(self):
        return self.N ** self.n

    @property
    def return_time(self):
        return self.T + self.tau * self.t

    def transition_matrix(self):
        return TransitionMatrixModel.full_shift(self.symbols)

    def to_dict(self):
        lo, hi = self.rectangle
        return {
            "N": self.N, "n": self.n, "T": self.T, "tau": self.tau, "t": self.t,
            "A": self.A, "delta": self.delta, "K": self.K,
            "rectangle": {"lo": [float(v) for v in lo], "hi": [float(v) for v in hi]},
            "components": [{"lo": [float(v) for v in c[0]], "hi": [float(v) for v in c[1]]}
                           for c in self.components],
            "component_count": len(self.components),
            "transition_matrix": "all-ones",
            "entropy": self.entropy,
            "evidence": self.evidence,
            "model": self.model,
        }


def _closed_return(model, t, A, N, x, y, i):
    """Closed-form return map in the ``i``-th coordinate pair (for root finding)."""
    s = model.multipliers[i] ** t
    Y = model.c + s * x - model.b + model.kappa * (y / s) ** 2
    X = -y / s - A * np.sin((Y - model.c) * np.pi * N / (2 * model.a))
    return X, Y


def _component_intervals(model, t, A, N, i, pad):
    """x-intervals in coordinate ``i`` whose end faces exit ``R`` on opposite sides."""
    lo, hi = model.rectangle(t)
    x_lo, x_hi = lo[i], hi[i]
    ys = np.array([model.c - model.a, model.c + model.a])
    s = model.multipliers[i] ** t

    def X_max(x):
        return _closed_return(model, t, A, N, x, ys, i)[0].max()

    def X_min(x):
        return _closed_return(model, t, A, N, x, ys, i)[0].min()

    intervals = []
    for k in range(-(N // 2), N // 2 + 1):
        # theta = (Y - c) pi N / 2a in (k pi - pi/2, k pi + pi/2) is a monotone branch
        th = np.array([k * np.pi - np.pi / 2, k * np.pi + np.pi / 2])
        xb = ((th * 2 * model.a / (np.pi * N)) + model.b) / s
        try:
            x1 = brentq(lambda x: X_max(x) - (x_lo - pad), *xb, xtol=1e-300, rtol=1e-15)
            x2 = brentq(lambda x: X_min(x) - (x_hi + pad), *xb, xtol=1e-300, rtol=1e-15)
        except ValueError:
            raise CertificateRefused(f"no monotone crossing branch for symbol {k} in coordinate {i}", component=k) from None
        intervals.append((min(x1, x2), max(x1, x2)))
    return intervals


def _face_samples(box_lo, box_hi, axis, value, count, rng):
    d = len(box_lo)
    P = box_lo + (box_hi - box_lo) * rng.random((count, d))
    if d == 2:
        other = 1 - axis
        P[:, other] = np.linspace(box_lo[other], box_hi[other], count)
    P[:, axis] = value
    return P


def _verify_component(model, shear, t, box_lo, box_hi, R_lo, R_hi, samples, rng):
    """Boundary checks for one component box; returns evidence or raises."""
    n = model.n
    evidence = {"faces": 0, "samples": 0, "min_exit_margin": np.inf, "min_stable_margin": np.inf}
    for i in range(n):
        sides = []
        for value in (box_lo[i], box_hi[i]):
            P = _face_samples(box_lo, box_hi, i, value, samples, rng)
            img, ok = model.return_map(P, t, shear)
            if not ok.all():
                return False, f"face x{i}={value!r} leaves the linear/connector path"
            X = img[:, i]
            if np.all(X < R_lo[i]):
                sides.append(-1)
                margin = R_lo[i] - X.max()
            elif np.all(X > R_hi[i]):
                sides.append(1)
                margin = X.min() - R_hi[i]
            else:
                return False, f"face x{i}={value!r} does not exit R in the unstable direction"
            # padding on 1-D faces: the jump between neighbouring samples must stay below the margin
            spread = np.max(np.abs(np.diff(X))) if n == 1 and len(X) > 1 else 0.0
            if spread >= margin:
                return False, f"face x{i}={value!r}: exit margin {margin:.3e} below sample spread {spread:.3e}"
            evidence["min_exit_margin"] = min(evidence["min_exit_margin"], margin / (R_hi[i] - R_lo[i]))
            evidence["faces"] += 1
            evidence["samples"] += len(P)
        if sides[0] == sides[1]:
            return False, f"faces of x{i} exit on the same side"
    for i in range(n):
        for value in (box_lo[n + i], box_hi[n + i]):
            P = _face_samples(box_lo, box_hi, n + i, value, samples, rng)
            img, ok = model.return_map(P, t, shear)
            if not ok.all():
                return False, f"face y{i}={value!r} leaves the linear/connector path"
            Y = img[:, n:]
            margin = min((Y - R_lo[n:]).min(), (R_hi[n:] - Y).min())
            if margin <= 0:
                return False, f"face y{i}={value!r} is not mapped strictly inside R in the stable direction"
            evidence["min_stable_margin"] = min(evidence["min_stable_margin"], margin / (R_hi[n] - R_lo[n]))
            evidence["faces"] += 1
            evidence["samples"] += len(P)
    return True, evidence


def build_horseshoe(model, N, delta=0.05, samples_per_face=FACE_SAMPLES, pad=CROSSING_PAD, K=None):
    """Apply the snake, pick ``t``, locate and verify the ``N^n`` crossing components.

    Raises
    ------
    CertificateRefused
        With the failing component index and the failed check.
    """
    N = check_odd(N)
    delta = check_positive(delta, "delta")
    A = amplitude_for(model.a, delta, N, model.alpha)
    shear = SnakeShear(A, N, model.a, model.n)
    if shear_c1_distance(shear) > model.alpha * delta * (1 + 1e-12):
        raise DomainError("snake amplitude exceeds the C^1 budget")
    t = choose_t(model, A)
    R_lo, R_hi = model.rectangle(t)
    n = model.n
    per_coord = []
    for i in range(n):
        width = R_hi[i] - R_lo[i]
        ivs = _component_intervals(model, t, A, N, i, pad * width)
        for lo_i, hi_i in ivs:
            if lo_i <= R_lo[i] or hi_i >= R_hi[i]:
                raise CertificateRefused(f"component in coordinate {i} is not inside R", component=i)
        for (_, h1), (l2, _) in zip(ivs, ivs[1:]):
            if l2 <= h1:
                raise CertificateRefused(f"components overlap in coordinate {i}", component=i)
        per_coord.append(ivs)
    rng = np.random.default_rng(0)
    components, evidence = [], []
    for index in np.ndindex(*([N] * n)):
        box_lo = np.concatenate([[per_coord[i][k][0] for i, k in enumerate(index)], R_lo[n:]])
        box_hi = np.concatenate([[per_coord[i][k][1] for i, k in enumerate(index)], R_hi[n:]])
        ok, info = _verify_component(model, shear, t, box_lo, box_hi, R_lo, R_hi, samples_per_face, rng)
        if not ok:
            raise CertificateRefused(f"component {list(index)}: {info}", component=list(index), evidence=info)
        components.append((box_lo, box_hi))
        evidence.append({"component": list(int(k) for k in index), **info})
    if K is None:
        K, _ = afirma_bounds(model, [N], delta)
    return HorseshoeCertificate(
        N=N, n=n, T=model.T, tau=model.tau, t=t, A=A, delta=delta,
        rectangle=(R_lo, R_hi), components=components,
        entropy=horseshoe_lower_bound(N, n, model.T, model.tau, t), K=K,
        evidence=evidence, model=model.describe(),
    )


class _ReturnMapSystem:
    """Return map on ``R`` as a plane system for the separated-set counter."""

    def __init__(self, model, shear, t):
        self.model, self.shear, self.t = model, shear, t
        self.periods = np.zeros(2 * model.n)

    def evaluate(self, X):
        return self.model.return_map(X, self.t, self.shear)[0]


def _survivor_seeds(system, R_lo, R_hi, depth, per_interval, max_seeds):
    """Seeds whose orbits stay in ``R`` for ``depth`` returns, by nested refinement in ``x``."""
    model = system.model
    n = model.n
    mid_y = 0.5 * (R_lo[n:] + R_hi[n:])
    intervals = [(R_lo[:n].copy(), R_hi[:n].copy())]

    def inside(Z):
        return np.all((Z >= R_lo) & (Z <= R_hi), axis=1)

    for level in range(1, depth + 1):
        new = []
        for lo, hi in intervals:
            axes = [np.linspace(lo[i], hi[i], per_interval) for i in range(n)]
            mesh = np.meshgrid(*axes, indexing="ij")
            X = np.column_stack([m.ravel() for m in mesh])
            Z = np.hstack([X, np.broadcast_to(mid_y, (len(X), n))])
            alive = inside(Z)
            W = Z
            for _ in range(level):
                W = system.evaluate(W)
                alive &= inside(W)
            if not alive.any():
                continue
            shape = (per_interval,) * n
            alive = alive.reshape(shape)
            # split the survivors into runs per coordinate and form boxes
            runs = []
            for i in range(n):
                mask = alive.any(axis=tuple(j for j in range(n) if j != i))
                idx = np.nonzero(mask)[0]
                breaks = np.nonzero(np.diff(idx) > 1)[0]
                starts = np.concatenate([[idx[0]], idx[breaks + 1]])
                ends = np.concatenate([idx[breaks], [idx[-1]]])
                h = (hi[i] - lo[i]) / (per_interval - 1)
                runs.append([(max(lo[i], axes[i][s0] - h), min(hi[i], axes[i][e0] + h))
                             for s0, e0 in zip(starts, ends)])
            for combo in np.ndindex(*[len(r) for r in runs]):
                new.append((np.array([runs[i][k][0] for i, k in enumerate(combo)]),
                            np.array([runs[i][k][1] for i, k in enumerate(combo)])))
        intervals = new
        if len(intervals) * per_interval ** n > max_seeds:
            raise BudgetError(f"refinement at depth {level} needs more than {max_seeds} seeds")
    seeds = []
    for lo, hi in intervals:
        axes = [np.linspace(lo[i], hi[i], per_interval) for i in range(n)]
        mesh = np.meshgrid(*axes, indexing="ij")
        X = np.column_stack([m.ravel() for m in mesh])
        seeds.append(np.hstack([X, np.broadcast_to(mid_y, (len(X), n))]))
    seeds = np.vstack(seeds) if seeds else np.empty((0, 2 * n))
    alive = inside(seeds)
    W = seeds
    for _ in range(depth):
        W = system.evaluate(W)
        alive &= inside(W)
    return seeds[alive]


def restricted_entropy(model, cert, depth=4, per_interval=None, max_seeds=10 ** 5, eps=None):
    """Separated-set entropy of the return map on orbits staying in ``R``.

    Seeds are placed by nested refinement so that every seed survives
    ``depth`` returns.  The fitted rate per return is divided by
    ``T + tau t``.

    Returns
    -------
    value : float
        Entropy per unit time.
    estimate : EntropyEstimate
        Rates per return.
    """
    shear = SnakeShear(cert.A, cert.N, model.a, model.n)
    system = _ReturnMapSystem(model, shear, cert.t)
    R_lo, R_hi = model.rectangle(cert.t)
    if per_interval is None:
        # about 8 samples across the thinnest component at every level
        widths = [np.min((hi - lo)[:model.n] / (R_hi - R_lo)[:model.n]) for lo, hi in cert.components]
        per_interval = int(np.ceil(8.0 / min(widths)))
    seeds = _survivor_seeds(system, R_lo, R_hi, depth, per_interval, max_seeds)
    if eps is None:
        # symbols are 2a/N apart in the stable coordinate after one return
        eps = model.a / (2 * cert.N)
    counts = count_table(system, seeds, [eps], depth)
    est = entropy_from_counts(counts, [eps], range(depth + 1), window=(1, depth) if depth >= 2 else (0, depth))
    return est.value / cert.return_time, est


def chi_min_plus_fixed_point(model):
    """Smallest positive exponent per unit time of the fixed point."""
    return float(np.log(model.multipliers.min()) / model.tau)


def find_N0(model, delta, eps, N_max=10 ** 7):
    """Smallest odd ``N`` for which the certified bound exceeds ``n chi_min_plus - eps``."""
    chi = chi_min_plus_fixed_point(model)
    for N in range(1, N_max + 1, 2):
        t = choose_t(model, amplitude_for(model.a, delta, N, model.alpha))
        if check_porradaa(N, model.n, model.T, model.tau, t, chi, eps):
            return N
    raise BudgetError(f"no odd N <= {N_max} satisfies the bound for eps={eps}")


def certify_against_estimator(cert, model, eps=None, tol=0.1, depth=4, max_seeds=10 ** 5):
    """Compare the certified entropy with the restricted estimator and the target bound.

    ``eps`` is the slack in ``n chi_min_plus - eps``; when omitted the report
    records the smallest slack for which the certificate's ``N`` satisfies the
    bound instead of checking it.
    """
    estimate, est = restricted_entropy(model, cert, depth=depth, max_seeds=max_seeds)
    chi = chi_min_plus_fixed_point(model)
    target = cert.n * chi
    eps_min = target - cert.entropy
    porradaa = None if eps is None else check_porradaa(cert.N, cert.n, cert.T, cert.tau, cert.t, chi, eps)
    undercount = estimate < cert.entropy - tol
    sym = shift_entropy(cert.transition_matrix()) / cert.return_time
    return {
        "certified_entropy": cert.entropy,
        "symbolic_entropy": sym,
        "estimator_entropy": estimate,
        "estimator_rate_per_return": est.value,
        "n_chi_min_plus": target,
        "eps": eps,
        "eps_min": eps_min,
        "porradaa": porradaa,
        "flag_undercount": bool(undercount),
        "flag_porradaa": bool(porradaa is False),
        "consistent": bool(not undercount and porradaa is not False),
    }
