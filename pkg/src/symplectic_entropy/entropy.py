"""Entropy estimators: separated-set counts, subshifts and horseshoe bounds."""

from dataclasses import dataclass, field
import warnings

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from sklearn.base import BaseEstimator

from ._greedy import greedy_separated, key_layout
from ._validation import check_odd, check_positive, check_positive_int
from .errors import DimensionError, DomainError

POWER_TOL = 1e-10
SATURATION_FRACTION = 0.05
DEFAULT_SEED_ORDER = 0


class SaturationWarning(UserWarning):
    """The fit window was cut because counts approach the number of seeds."""


def _observe(model, X):
    observe = getattr(model, "observe", None)
    return X if observe is None else observe(X)


def _obs_periods(model):
    periods = getattr(model, "observation_periods", None)
    return np.asarray(model.periods if periods is None else periods, dtype=float)


def orbit_observations(model, seeds, n_max):
    """Observed orbit segments of shape ``(S, n_max + 1, d)``."""
    X = np.asarray(seeds, dtype=float)
    if X.ndim != 2:
        raise DimensionError(f"seeds must be a 2-D array, got shape {X.shape}")
    first = _observe(model, X)
    obs = np.empty((len(X), n_max + 1, first.shape[1]))
    obs[:, 0] = first
    for t in range(1, n_max + 1):
        X = model.evaluate(X)
        obs[:, t] = _observe(model, X)
    return obs


def order_seeds(seeds, seed_order=None):
    """Seeds in natural order, or permuted by a generator seeded with ``seed_order``."""
    seeds = np.asarray(seeds, dtype=float)
    if seed_order is None:
        return seeds
    perm = np.random.default_rng(seed_order).permutation(len(seeds))
    return seeds[perm]


def _greedy(obs, n, eps, periods, initial=None):
    times, coords = key_layout(obs.shape[2], n)
    if initial is None:
        initial = np.zeros(len(obs), dtype=bool)
    return greedy_separated(np.ascontiguousarray(obs), n, float(eps), periods, times, coords, initial)


def separated_count(model, seeds, n, eps, seed_order=None):
    """Size of a greedy ``(n, eps)``-separated subset of the seeds.

    Two points are separated when their orbits differ by more than ``eps``
    in the torus sup metric at some time ``0 <= j <= n``.  The result is a
    lower bound for the maximal separated set and depends only on the seed
    order.
    """
    n = check_positive_int(n, "n", minimum=0)
    eps = check_positive(eps, "eps")
    obs = orbit_observations(model, order_seeds(seeds, seed_order), n)
    return int(_greedy(obs, n, eps, _obs_periods(model)).sum())


def count_table(model, seeds, epsilons, n_max, seed_order=None):
    """Counts ``r(n, eps)`` for ``n = 0..n_max`` and every ``eps``.

    Each separated set is grown from the larger of the sets for
    ``(n - 1, eps)`` and ``(n, eps')`` with the next larger ``eps'``; both
    are already ``(n, eps)``-separated, so the table is monotone in ``n``
    and ``eps`` by construction.

    Returns
    -------
    counts : ndarray of int, shape (len(epsilons), n_max + 1)
        Rows follow ``epsilons`` in the order given.
    """
    n_max = check_positive_int(n_max, "n_max", minimum=0)
    epsilons = [check_positive(e, "eps") for e in epsilons]
    obs = orbit_observations(model, order_seeds(seeds, seed_order), n_max)
    periods = _obs_periods(model)
    counts = np.zeros((len(epsilons), n_max + 1), dtype=np.int64)
    previous_eps = {}
    for row in sorted(range(len(epsilons)), key=lambda r: -epsilons[r]):
        eps = epsilons[row]
        prev_n = None
        for n in range(n_max + 1):
            candidates = [m for m in (prev_n, previous_eps.get(n)) if m is not None]
            initial = max(candidates, key=lambda m: m.sum()) if candidates else None
            if initial is not None and initial.all():
                keep = initial
            else:
                keep = _greedy(obs[:, :n + 1], n, eps, periods, initial)
            counts[row, n] = keep.sum()
            prev_n = keep
            previous_eps[n] = keep
    return counts


@dataclass
class EntropyEstimate:
    """Fitted growth rates of a count table.

    ``windows[i]`` is the inclusive ``(n_lo, n_hi)`` fit window for
    ``epsilons[i]`` and ``rates[i]`` the least-squares slope of
    ``log r(n, eps)`` there.
    """

    epsilons: list
    n_values: list
    counts: np.ndarray
    rates: list
    value: float
    windows: list
    residuals: list
    num_seeds: int = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "epsilons": [float(e) for e in self.epsilons],
            "n_values": [int(n) for n in self.n_values],
            "counts": [[int(c) for c in row] for row in self.counts],
            "rates": [float(r) for r in self.rates],
            "value": float(self.value),
            "windows": [[int(a), int(b)] for a, b in self.windows],
            "residuals": [float(r) for r in self.residuals],
            "num_seeds": None if self.num_seeds is None else int(self.num_seeds),
            "notes": list(self.notes),
        }


def auto_window(n_values, counts, num_seeds=None, saturation=SATURATION_FRACTION, min_points=3):
    """Fit window ending before counts reach ``saturation * num_seeds``.

    A finite seed set stops resolving the dynamics long before the count
    equals the number of seeds, so the window ends at the last ``n`` with
    ``r(n) <= saturation * num_seeds``.  It starts one step after the first
    ``n``: at time zero the separation balls are cubes and only later take
    their asymptotic shape, so the first step is a packing transient.
    """
    n_values = list(n_values)
    counts = np.asarray(counts, dtype=float)
    hi = len(n_values) - 1
    if num_seeds is not None:
        limit = saturation * num_seeds
        below = np.nonzero(counts <= limit)[0]
        hi = int(below.max()) if len(below) else 0
    lo = 1 if hi >= min_points else 0
    # skip a flat start, unless the counts never grow at all
    while lo < hi and counts[lo + 1] <= counts[lo] and counts[hi] > counts[lo]:
        lo += 1
    if hi - lo + 1 < min_points:
        return None
    return n_values[lo], n_values[hi]


def _line_fit(x, y):
    """Least-squares slope on centered data (exactly zero for constant ``y``) and RMS residual."""
    xc, yc = x - x.mean(), y - y.mean()
    slope = float(xc @ yc / (xc @ xc))
    return slope, float(np.sqrt(np.mean((yc - slope * xc) ** 2)))


def entropy_from_counts(counts, epsilons, n_values, window=None, num_seeds=None,
                        saturation=SATURATION_FRACTION, min_points=3):
    """Slope fit of ``log r`` against ``n`` per ``eps``, then the max over ``eps``.

    Parameters
    ----------
    counts : array (len(epsilons), len(n_values))
    window : (int, int), optional
        Inclusive fit window; chosen by :func:`auto_window` when omitted.
    num_seeds : int, optional
        Enables saturation detection in the automatic window.

    Returns
    -------
    EntropyEstimate
    """
    counts = np.asarray(counts, dtype=np.int64)
    n_values = [int(n) for n in n_values]
    epsilons = [float(e) for e in epsilons]
    if counts.shape != (len(epsilons), len(n_values)):
        raise DimensionError(f"counts shape {counts.shape} does not match ({len(epsilons)}, {len(n_values)})")
    rates, windows, residuals, notes = [], [], [], []
    n_arr = np.array(n_values, dtype=float)
    for row, eps in enumerate(epsilons):
        if window is None:
            win = auto_window(n_values, counts[row], num_seeds, saturation, min_points)
            if win is None:
                win = (n_values[0], n_values[min(len(n_values), min_points) - 1])
                msg = f"eps={eps!r}: saturated before {min_points} growth steps; fitting n in {list(win)}"
                warnings.warn(msg, SaturationWarning, stacklevel=2)
                notes.append(msg)
            elif num_seeds is not None and win[1] < n_values[-1]:
                notes.append(f"eps={eps!r}: window truncated at n={win[1]} by saturation")
        else:
            win = (int(window[0]), int(window[1]))
        sel = (n_arr >= win[0]) & (n_arr <= win[1])
        if sel.sum() < 2:
            raise DomainError(f"fit window {win} holds fewer than 2 values of n")
        y = np.log(np.maximum(counts[row, sel], 1))
        slope, resid = _line_fit(n_arr[sel], y)
        rates.append(slope)
        windows.append(win)
        residuals.append(resid)
    value = max(0.0, max(rates)) if rates else 0.0
    return EntropyEstimate(epsilons, n_values, counts, rates, value, windows, residuals, num_seeds, notes)


def estimate_entropy(model, seeds, epsilons, n_max, window=None, seed_order=DEFAULT_SEED_ORDER,
                     saturation=SATURATION_FRACTION):
    """Count table followed by :func:`entropy_from_counts`."""
    counts = count_table(model, seeds, epsilons, n_max, seed_order)
    return entropy_from_counts(counts, epsilons, range(n_max + 1), window, len(seeds), saturation)


def grid_seeds(dim, per_dim, low=0.0, high=1.0):
    """Cell-centered regular grid with ``per_dim`` points per coordinate."""
    per_dim = check_positive_int(per_dim, "per_dim")
    low = np.broadcast_to(np.asarray(low, dtype=float), (dim,))
    high = np.broadcast_to(np.asarray(high, dtype=float), (dim,))
    axes = [lo + (np.arange(per_dim) + 0.5) * (hi - lo) / per_dim for lo, hi in zip(low, high)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


class SeparatedSetEntropy(BaseEstimator):
    """Estimator for topological entropy from separated-set counts.

    Parameters
    ----------
    model : object
        Map with ``evaluate`` and ``periods``.
    epsilons : sequence of float
    n_max : int
    window : (int, int) or None
    seed_order : int or None
    saturation : float

    Attributes
    ----------
    counts_ : ndarray
    rates_ : list of float
    entropy_ : float
    estimate_ : EntropyEstimate
    """

    def __init__(self, model=None, epsilons=(1e-2,), n_max=10, window=None, seed_order=DEFAULT_SEED_ORDER,
                 saturation=SATURATION_FRACTION):
        self.model = model
        self.epsilons = epsilons
        self.n_max = n_max
        self.window = window
        self.seed_order = seed_order
        self.saturation = saturation

    def fit(self, X, y=None):
        """Count separated subsets of the seed array ``X``."""
        X = np.asarray(X, dtype=float)
        self.estimate_ = estimate_entropy(self.model, X, list(self.epsilons), self.n_max,
                                          self.window, self.seed_order, self.saturation)
        self.counts_ = self.estimate_.counts
        self.rates_ = self.estimate_.rates
        self.entropy_ = self.estimate_.value
        return self


@dataclass(frozen=True)
class TransitionMatrixModel:
    """Subshift of finite type given by a 0/1 transition matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        A = np.asarray(self.matrix)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] == 0:
            raise DimensionError(f"transition matrix must be square and nonempty, got shape {A.shape}")
        if not np.all((A == 0) | (A == 1)):
            raise DomainError("transition matrix entries must be 0 or 1")
        A = A.astype(np.int64)
        A.setflags(write=False)
        object.__setattr__(self, "matrix", A)

    @property
    def symbols(self):
        return self.matrix.shape[0]

    @classmethod
    def full_shift(cls, k):
        return cls(np.ones((k, k), dtype=np.int64))


def _perron_root(B, tol, max_iter):
    """Spectral radius of an irreducible nonnegative matrix.

    Power iteration on ``B + I``, which is primitive, so the iteration
    converges geometrically from the all-ones vector.
    """
    k = len(B)
    C = B + np.eye(k)
    v = np.ones(k) / np.sqrt(k)
    for _ in range(max_iter):
        w = C @ v
        w /= np.linalg.norm(w)
        # stop on the vector, norms can repeat by coincidence
        if np.max(np.abs(w - v)) <= tol:
            return float(w @ C @ w) - 1.0
        v = w
    return float(np.max(np.abs(np.linalg.eigvals(B))))


def shift_entropy(tm, tol=POWER_TOL, max_iter=100_000):
    """Log spectral radius of the transition matrix; ``-inf`` if nilpotent.

    The radius is the largest Perron root over the strongly connected
    components of the transition graph.
    """
    if not isinstance(tm, TransitionMatrixModel):
        tm = TransitionMatrixModel(tm)
    A = tm.matrix.astype(float)
    ncomp, labels = connected_components(csr_matrix(A), directed=True, connection="strong")
    rho = 0.0
    for c in range(ncomp):
        idx = np.flatnonzero(labels == c)
        B = A[np.ix_(idx, idx)]
        if B.any():
            rho = max(rho, _perron_root(B, tol, max_iter))
    if rho == 0.0:
        return -np.inf
    return float(np.log(rho))


def horseshoe_lower_bound(N, n, T, tau, t):
    """``n log N / (T + tau t)``."""
    N = check_odd(N)
    n, T, tau = (check_positive_int(v, name) for v, name in ((n, "n"), (T, "T"), (tau, "tau")))
    t = check_positive_int(t, "t", minimum=0)
    return n * np.log(N) / (T + tau * t)


def check_porradaa(N, n, T, tau, t, chi_min_plus, eps):
    """True iff ``n log N / (T + tau t) > n * chi_min_plus - eps``."""
    check_positive(eps, "eps")
    return bool(horseshoe_lower_bound(N, n, T, tau, t) > n * chi_min_plus - eps)


@dataclass(frozen=True)
class RuelleReport:
    entropy: float
    S_lower: float
    tol: float
    gap: float
    flagged: bool
    status: str
    message: str

    def to_dict(self):
        return dict(self.__dict__)


def ruelle_consistency(entropy, S_lower, tol=0.1, model=None):
    """Compare an entropy estimate with the periodic-orbit lower bound of S.

    A flag means ``entropy > S_lower + tol``.  Both numbers are finite
    approximations, so a flag points at an over-counting estimator or an
    insufficient periodic search.  It is never evidence against the generic
    inequality ``h_top <= S``.
    """
    name = "" if model is None else f"{model!r}: "
    if S_lower is None or not np.isfinite(S_lower):
        return RuelleReport(float(entropy), float("nan"), tol, float("nan"), False, "inconclusive",
                            f"{name}no hyperbolic periodic orbit found; periodic search insufficient")
    gap = float(entropy) - float(S_lower)
    if gap > tol:
        return RuelleReport(float(entropy), float(S_lower), tol, gap, True, "flagged",
                            f"{name}entropy estimate exceeds S_lower by {gap:.4f} > {tol}: estimator "
                            "over-count or insufficient periodic search (not a counterexample; the "
                            "inequality holds generically)")
    return RuelleReport(float(entropy), float(S_lower), tol, gap, False, "consistent",
                        f"{name}entropy estimate <= S_lower + {tol} (gap {gap:.4f})")


class FullShiftModel:
    """Left shift on words of length ``length`` over ``symbols`` letters.

    The state is the symbol vector (cyclically rotated), the observation is
    the leading symbol, so distinct ``(n+1)``-prefixes are 1 apart.
    """

    def __init__(self, symbols, length):
        self.symbols = check_positive_int(symbols, "symbols")
        self.length = check_positive_int(length, "length")
        self.periods = np.zeros(self.length)
        self.observation_periods = np.zeros(1)

    def evaluate(self, X):
        return np.roll(np.asarray(X, dtype=float), -1, axis=-1)

    def observe(self, X):
        return np.asarray(X, dtype=float)[:, :1]

    def all_words(self):
        grids = np.meshgrid(*[np.arange(self.symbols)] * self.length, indexing="ij")
        return np.column_stack([g.ravel() for g in grids]).astype(float)


class IdentityModel:
    """Identity map on the unit torus of dimension ``dim``."""

    def __init__(self, dim):
        self.periods = np.ones(dim)

    def evaluate(self, X):
        return np.array(X, dtype=float)
