"""Concrete symplectic map families on the torus with exact Jacobians.

Coordinates are ``(x_1..x_n, y_1..y_n)`` and every torus coordinate is
reduced to ``[0, 1)``.  ``evaluate`` and ``jacobian`` accept a single point
of shape ``(2n,)`` or a batch of shape ``(S, 2n)``.
"""

import numpy as np

from ._validation import check_points, check_positive_int
from .core import Word, is_symplectic
from .errors import DimensionError, DomainError, NumericError

TWO_PI = 2.0 * np.pi


class MapModel:
    """Base class for symplectic maps.

    Subclasses implement ``_evaluate`` and ``_jacobian`` on batches of
    lifted (unreduced) points.

    Attributes
    ----------
    dim_half : int
    periods : ndarray of shape (2n,)
        Period of each coordinate, ``0`` for a plane coordinate.
    """

    family = "abstract"

    def __init__(self, dim_half, periods=None):
        self.dim_half = int(dim_half)
        if periods is None:
            periods = np.ones(2 * self.dim_half)
        self.periods = np.asarray(periods, dtype=float)

    @property
    def dim(self):
        return 2 * self.dim_half

    def params(self):
        return {}

    def describe(self):
        return {"family": self.family, "dim_half": self.dim_half, **self.params()}

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in self.params().items())
        return f"{type(self).__name__}({args})"

    def _check(self, points):
        single = np.ndim(points) == 1
        try:
            X = check_points(points, self.dim, "point")
        except NumericError:
            raise NumericError("non-finite point") from None
        return X, single

    def reduce(self, points):
        """Canonical representative with torus coordinates in ``[0, 1)``."""
        X = np.array(points, dtype=float)
        torus = self.periods > 0
        if np.any(torus):
            p = self.periods[torus]
            X[..., torus] = np.mod(X[..., torus], p)
            # mod can round up to p itself
            X[..., torus] = np.where(X[..., torus] >= p, 0.0, X[..., torus])
        return X

    def displacement(self, a, b):
        """Signed difference ``a - b`` with torus coordinates wrapped to ``[-1/2, 1/2)``."""
        d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
        torus = self.periods > 0
        if np.any(torus):
            p = self.periods[torus]
            d[..., torus] = d[..., torus] - p * np.round(d[..., torus] / p)
        return d

    def distance(self, a, b):
        """Sup-norm distance in the torus metric."""
        return np.max(np.abs(self.displacement(a, b)), axis=-1)

    def lift(self, points):
        """Unreduced image, so that ``reduce(lift(x)) == evaluate(x)``."""
        X, single = self._check(points)
        Y = self._evaluate(X)
        return Y[0] if single else Y

    def evaluate(self, points):
        X, single = self._check(points)
        Y = self.reduce(self._evaluate(X))
        return Y[0] if single else Y

    def jacobian(self, points):
        X, single = self._check(points)
        D = self._jacobian(X)
        return D[0] if single else D

    def iterate(self, points, steps):
        X = np.asarray(points, dtype=float)
        for _ in range(steps):
            X = self.evaluate(X)
        return X

    def orbit(self, point, n):
        """Orbit of length ``n + 1`` as an array of shape ``(n + 1, 2n)``."""
        out = np.empty((n + 1, self.dim))
        out[0] = self.reduce(self._check(point)[0][0])
        for t in range(n):
            out[t + 1] = self.evaluate(out[t])
        return out

    def orbit_cocycle(self, point, n):
        """Orbit of length ``n + 1`` and the word of ``n`` Jacobians along it."""
        n = check_positive_int(n, "n")
        orbit = self.orbit(point, n)
        word = Word(list(self._jacobian(orbit[:-1])))
        return orbit, word

    def _evaluate(self, X):
        raise NotImplementedError

    def _jacobian(self, X):
        raise NotImplementedError


class StandardMap(MapModel):
    """``y' = y + (k/2pi) sin 2pi x``, ``x' = x + y'``, both mod 1."""

    family = "standard_map"

    def __init__(self, k):
        super().__init__(1)
        self.k = float(k)

    def params(self):
        return {"k": self.k}

    def _evaluate(self, X):
        x, y = X[:, 0], X[:, 1]
        yn = y + self.k / TWO_PI * np.sin(TWO_PI * x)
        return np.column_stack([x + yn, yn])

    def _jacobian(self, X):
        kc = self.k * np.cos(TWO_PI * X[:, 0])
        D = np.empty((len(X), 2, 2))
        D[:, 0, 0] = 1.0 + kc
        D[:, 0, 1] = 1.0
        D[:, 1, 0] = kc
        D[:, 1, 1] = 1.0
        return D


class CoupledStandardMaps(MapModel):
    """Two standard maps coupled through the potential ``c cos 2pi(x1 - x2) / 2pi``.

    The kick is ``y1 += (k1/2pi) sin 2pi x1 + c sin 2pi(x1 - x2)`` and
    ``y2 += (k2/2pi) sin 2pi x2 - c sin 2pi(x1 - x2)`` followed by
    the drift ``x += y'``.
    """

    family = "coupled_standard_maps"

    def __init__(self, k1, k2, c):
        super().__init__(2)
        self.k1, self.k2, self.c = float(k1), float(k2), float(c)

    def params(self):
        return {"k1": self.k1, "k2": self.k2, "c": self.c}

    def _evaluate(self, X):
        x1, x2, y1, y2 = X.T
        s = np.sin(TWO_PI * (x1 - x2))
        y1n = y1 + self.k1 / TWO_PI * np.sin(TWO_PI * x1) + self.c * s
        y2n = y2 + self.k2 / TWO_PI * np.sin(TWO_PI * x2) - self.c * s
        return np.column_stack([x1 + y1n, x2 + y2n, y1n, y2n])

    def _jacobian(self, X):
        x1, x2 = X[:, 0], X[:, 1]
        g = TWO_PI * self.c * np.cos(TWO_PI * (x1 - x2))
        # Hessian of the kick potential
        H = np.empty((len(X), 2, 2))
        H[:, 0, 0] = self.k1 * np.cos(TWO_PI * x1) + g
        H[:, 1, 1] = self.k2 * np.cos(TWO_PI * x2) + g
        H[:, 0, 1] = H[:, 1, 0] = -g
        eye = np.broadcast_to(np.eye(2), H.shape)
        D = np.empty((len(X), 4, 4))
        D[:, :2, :2] = eye + H
        D[:, :2, 2:] = eye
        D[:, 2:, :2] = H
        D[:, 2:, 2:] = eye
        return D


class TorusAutomorphism(MapModel):
    """Linear map ``x -> A x mod 1`` for an integer symplectic matrix ``A``."""

    family = "torus_automorphism"

    def __init__(self, matrix):
        A = np.asarray(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
            raise DimensionError(f"matrix must be square of even size, got shape {A.shape}")
        if not np.array_equal(A, np.round(A)):
            raise DomainError("torus automorphism needs an integer matrix")
        if not is_symplectic(A, 1e-12):
            raise DomainError("torus automorphism matrix is not symplectic")
        super().__init__(A.shape[0] // 2)
        self.matrix = A

    def params(self):
        return {"matrix": self.matrix.astype(int).tolist()}

    def _evaluate(self, X):
        return X @ self.matrix.T

    def _jacobian(self, X):
        return np.broadcast_to(self.matrix, (len(X),) + self.matrix.shape).copy()


class SnakeComposed(MapModel):
    """Base model followed by the shear ``x_i += amplitude sin(2pi N y_i)``."""

    family = "snake_composed"

    def __init__(self, base, amplitude, frequency):
        super().__init__(base.dim_half, base.periods)
        self.base = base
        self.amplitude = float(amplitude)
        self.frequency = check_positive_int(frequency, "frequency")

    def params(self):
        return {"base": self.base.describe(), "amplitude": self.amplitude, "frequency": self.frequency}

    def _evaluate(self, X):
        Y = self.base._evaluate(X)
        n = self.dim_half
        Y[:, :n] += self.amplitude * np.sin(TWO_PI * self.frequency * Y[:, n:])
        return Y

    def _jacobian(self, X):
        n = self.dim_half
        Y = self.base._evaluate(X)
        shear = np.broadcast_to(np.eye(self.dim), (len(X), self.dim, self.dim)).copy()
        idx = np.arange(n)
        w = TWO_PI * self.frequency
        shear[:, idx, n + idx] = self.amplitude * w * np.cos(w * Y[:, n:])
        return shear @ self.base._jacobian(X)


def standard_map(k):
    return StandardMap(k)


def coupled_standard_maps(k1, k2, c):
    return CoupledStandardMaps(k1, k2, c)


def torus_automorphism(matrix):
    return TorusAutomorphism(matrix)


def snake_composed(base, amplitude, frequency):
    return SnakeComposed(base, amplitude, frequency)


CAT_MATRIX = np.array([[2, 1], [1, 1]])


def cat_map():
    return TorusAutomorphism(CAT_MATRIX)


def product_cat_map():
    """``cat (+) cat`` on the 4-torus in ``(x1, x2, y1, y2)`` coordinates."""
    A = np.zeros((4, 4))
    A[np.ix_([0, 2], [0, 2])] = CAT_MATRIX
    A[np.ix_([1, 3], [1, 3])] = CAT_MATRIX
    return TorusAutomorphism(A)


def build_model(spec):
    """Model from a mapping like ``{"family": "standard_map", "k": 1.2}``."""
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "standard_map":
        return StandardMap(spec["k"])
    if family == "coupled_standard_maps":
        return CoupledStandardMaps(spec["k1"], spec["k2"], spec["c"])
    if family == "torus_automorphism":
        return TorusAutomorphism(spec["matrix"])
    if family == "cat":
        return cat_map()
    if family == "cat_product":
        return product_cat_map()
    if family == "identity":
        return torus_automorphism(np.eye(int(spec.get("dim", 2)), dtype=int))
    if family == "snake_composed":
        return SnakeComposed(build_model(spec["base"]), spec["amplitude"], spec["frequency"])
    raise DomainError(f"unknown model family {family!r}")


MODEL_FAMILIES = ("standard_map", "coupled_standard_maps", "torus_automorphism", "cat", "cat_product",
                  "identity", "snake_composed")
