"""Linear algebra on the standard symplectic space.

Coordinates are ordered ``(x_1..x_n, y_1..y_n)`` and the form is
``omega(u, v) = u @ J @ v`` with ``J = [[0, I], [-I, 0]]``, so that
``diag(a_1..a_n, 1/a_1..1/a_n)`` is symplectic.

Words store their letters in orbit order: letter 0 is the matrix at the
starting point and is applied first, so the product of ``(A_0, ..., A_{k-1})``
is ``A_{k-1} @ ... @ A_0``.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int, check_square_even
from .errors import DimensionError, DomainError, NumericError

SYMPL_TOL = 1e-9
TOL_ZERO = 1e-8
CLUSTER_RTOL = 1e-6
LONG_WORD = 200
# Above this 2-norm condition number the product is not eigen-decomposed directly.
DIRECT_COND_MAX = 1e8
# Letters are pre-multiplied into chunks whose condition number stays below this.
CHUNK_COND_MAX = 1e6
COUPLING_TOL = 1e-8


def standard_form(n):
    """Return the standard symplectic matrix ``J`` of size ``2n``."""
    n = check_positive_int(n, "n")
    J = np.zeros((2 * n, 2 * n))
    J[:n, n:] = np.eye(n)
    J[n:, :n] = -np.eye(n)
    return J


def symplectic_residual(M):
    """Return ``max |M^T J M - J|``."""
    M = check_square_even(M)
    J = standard_form(M.shape[0] // 2)
    return float(np.max(np.abs(M.T @ J @ M - J)))


def is_symplectic(M, tol=SYMPL_TOL):
    return symplectic_residual(M) <= tol


def symplectic_inverse(M):
    """Inverse of a symplectic matrix via ``M^{-1} = -J M^T J``."""
    M = check_square_even(M)
    J = standard_form(M.shape[0] // 2)
    return -J @ M.T @ J


def _frozen(A):
    A = np.array(A, dtype=float)
    A.setflags(write=False)
    return A


class Word:
    """Finite nonempty sequence of equally sized square letters.

    Parameters
    ----------
    letters : sequence of array-like, each of shape (2n, 2n)
        Letters in orbit order (index 0 is applied first).
    """

    __slots__ = ("_letters",)

    def __init__(self, letters):
        mats = tuple(_frozen(check_square_even(A, name=f"letter {k}"))
                     for k, A in enumerate(letters))
        if not mats:
            raise DimensionError("a word must contain at least one letter")
        dims = sorted({A.shape[0] for A in mats})
        if len(dims) > 1:
            raise DimensionError(f"letters of mixed dimensions {dims}")
        self._letters = mats

    @classmethod
    def _from_frozen(cls, letters):
        word = cls.__new__(cls)
        word._letters = tuple(letters)
        return word

    @property
    def letters(self):
        return self._letters

    @property
    def dim_half(self):
        return self._letters[0].shape[0] // 2

    def __len__(self):
        return len(self._letters)

    def __iter__(self):
        return iter(self._letters)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Word._from_frozen(self._letters[idx])
        return self._letters[idx]

    def __add__(self, other):
        other = other if isinstance(other, Word) else Word(other)
        if other.dim_half != self.dim_half:
            raise DimensionError("cannot concatenate words of different dimension")
        return Word._from_frozen(self._letters + other._letters)

    def __mul__(self, k):
        k = check_positive_int(k, "power")
        return Word._from_frozen(self._letters * k)

    def rotate(self, k):
        """Cyclic rotation starting the word at letter ``k``."""
        k %= len(self)
        return Word._from_frozen(self._letters[k:] + self._letters[:k])

    def product(self):
        return word_product(self)

    def __repr__(self):
        return f"Word(length={len(self)}, dim_half={self.dim_half})"

    def to_json(self):
        return {"dim_half": self.dim_half, "length": len(self),
                "letters": [matrix_to_text(A) for A in self._letters]}

    @classmethod
    def from_json(cls, data):
        return cls([matrix_from_text(s) for s in data["letters"]])


def as_word(w):
    return w if isinstance(w, Word) else Word(w)


def word_product(w):
    """Product ``A_{k-1} @ ... @ A_0`` of a word in orbit order."""
    w = as_word(w)
    P = np.array(w[0])
    for A in w.letters[1:]:
        P = A @ P
    return P


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues with multiplicity, sorted by modulus ascending."""

    eigenvalues: np.ndarray

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=complex)
        order = np.lexsort((np.angle(ev), np.abs(ev)))
        ev = ev[order]
        ev.setflags(write=False)
        object.__setattr__(self, "eigenvalues", ev)

    @property
    def moduli(self):
        return np.abs(self.eigenvalues)

    def __len__(self):
        return len(self.eigenvalues)

    def clusters(self, rtol=CLUSTER_RTOL):
        """Group eigenvalues lying within ``rtol`` relative distance.

        Returns a list of ``(mean_value, multiplicity)`` pairs.
        """
        ev = self.eigenvalues
        labels = -np.ones(len(ev), dtype=int)
        groups = []
        for i, lam in enumerate(ev):
            if labels[i] >= 0:
                continue
            labels[i] = len(groups)
            members = [i]
            for j in range(i + 1, len(ev)):
                if labels[j] < 0 and abs(ev[j] - lam) <= rtol * max(1.0, abs(lam)):
                    labels[j] = labels[i]
                    members.append(j)
            groups.append(members)
        return [(complex(np.mean(ev[g])), len(g)) for g in groups]

    def pairing_residual(self):
        """Largest relative distance from ``1/lambda`` to the spectrum."""
        ev = self.eigenvalues
        inv = 1.0 / ev
        dist = np.abs(inv[:, None] - ev[None, :]).min(axis=1)
        return float(np.max(dist / np.maximum(1.0, np.abs(inv))))


def spectrum(M):
    """All eigenvalues of a (symplectic) matrix sorted by modulus."""
    M = check_square_even(M)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        cond = np.linalg.cond(M)
        raise NumericError(f"eigenvalue solver failed (condition number {cond:.3e})") from exc
    return Spectrum(ev)


@dataclass(frozen=True)
class LyapunovVector:
    """Lyapunov exponents sorted ascending (log-scale per iterate)."""

    chis: np.ndarray
    period: int = field(default=1)

    def __post_init__(self):
        chis = np.sort(np.asarray(self.chis, dtype=float))
        chis.setflags(write=False)
        object.__setattr__(self, "chis", chis)

    def __len__(self):
        return len(self.chis)

    def __iter__(self):
        return iter(self.chis)

    def pairing_residual(self):
        return float(np.max(np.abs(self.chis + self.chis[::-1])))

    def zero_sum_residual(self):
        return float(abs(np.sum(self.chis)))


# ---------------------------------------------------------------------------
# periodic QR accumulation


def _chunk_letters(letters, cond_max=CHUNK_COND_MAX):
    chunks = []
    current = None
    for A in letters:
        if current is None:
            current = np.array(A)
            continue
        trial = A @ current
        if np.all(np.isfinite(trial)) and np.linalg.cond(trial) <= cond_max:
            current = trial
        else:
            chunks.append(current)
            current = np.array(A)
    chunks.append(current)
    return chunks


def _coupled_blocks(M, tol):
    """Contiguous index blocks such that ``M`` is block upper triangular."""
    d = M.shape[0]
    reach = np.arange(d)
    for j in range(d):
        below = np.nonzero(np.abs(M[j + 1:, j]) > tol)[0]
        if below.size:
            reach[j] = j + 1 + below.max()
    blocks = []
    start = 0
    end = 0
    for j in range(d):
        end = max(end, reach[j])
        if end == j:
            blocks.append((start, j + 1))
            start = j + 1
            end = j + 1
    return blocks


def _periodic_qr_log_moduli(letters, max_passes=64):
    chunks = _chunk_letters(letters)
    d = chunks[0].shape[0]
    Q0 = np.eye(d)
    prev_blocks = None
    for n_pass in range(max_passes):
        Q = Q0
        Rs = []
        for C in chunks:
            Q, R = np.linalg.qr(C @ Q)
            Rs.append(R)
        M = Q0.T @ Q
        blocks = _coupled_blocks(M, COUPLING_TOL)
        settled = all(j - i <= 2 for i, j in blocks) and blocks == prev_blocks
        if n_pass >= 2 and (settled or blocks == prev_blocks and n_pass >= 8):
            break
        prev_blocks = blocks
        Q0 = Q
    out = []
    for i, j in blocks:
        B = np.eye(j - i)
        log_scale = 0.0
        for R in Rs:
            B = R[i:j, i:j] @ B
            s = np.linalg.norm(B)
            if s == 0 or not np.isfinite(s):
                raise NumericError("degenerate block in periodic QR accumulation")
            B /= s
            log_scale += np.log(s)
        ev = np.linalg.eigvals(M[i:j, i:j] @ B)
        if np.any(ev == 0):
            raise NumericError("zero eigenvalue modulus in periodic product")
        out.extend(np.log(np.abs(ev)) + log_scale)
    return np.asarray(out)


def periodic_log_moduli(w, max_passes=64):
    """Logarithms of the eigenvalue moduli of a word's product.

    Short, well-conditioned products are eigen-decomposed directly. Long or
    ill-conditioned ones go through a periodic QR sweep over the cyclic word,
    which never forms the product and keeps small eigenvalues accurate.
    """
    w = as_word(w)
    if len(w) <= LONG_WORD:
        P = word_product(w)
        if np.all(np.isfinite(P)) and np.linalg.cond(P) <= DIRECT_COND_MAX:
            ev = np.linalg.eigvals(P)
            if np.any(ev == 0):
                raise NumericError("zero eigenvalue modulus")
            return np.log(np.abs(ev))
    return _periodic_qr_log_moduli(w.letters, max_passes)


def lyapunov_vector_periodic(w):
    """Lyapunov vector ``(1/tau) log|lambda_i|`` of a periodic cocycle word."""
    w = as_word(w)
    return LyapunovVector(periodic_log_moduli(w) / len(w), period=len(w))


def finite_time_lyapunov(letters):
    """Finite-time exponents of an orbit segment by a single QR sweep."""
    w = as_word(letters)
    Q = np.eye(2 * w.dim_half)
    total = np.zeros(2 * w.dim_half)
    for C in _chunk_letters(w.letters):
        Q, R = np.linalg.qr(C @ Q)
        total += np.log(np.abs(np.diag(R)))
    return LyapunovVector(total / len(w), period=len(w))


def sum_positive_exponents(L, tol_zero=TOL_ZERO):
    """``S(p, f)``: sum of the exponents above ``tol_zero``."""
    chis = np.asarray(L.chis if isinstance(L, LyapunovVector) else L, dtype=float)
    return float(np.sum(chis[chis > tol_zero]))


def chi_min_plus(L, tol_zero=TOL_ZERO):
    """Smallest exponent above ``tol_zero``."""
    chis = np.asarray(L.chis if isinstance(L, LyapunovVector) else L, dtype=float)
    pos = chis[chis > tol_zero]
    if pos.size == 0:
        raise DomainError("no positive Lyapunov exponent (non-hyperbolic input)")
    return float(pos.min())


@dataclass(frozen=True)
class Classification:
    kind: str
    m: int = 0

    def __str__(self):
        return f"m_elliptic({self.m})" if self.kind == "m_elliptic" else self.kind

    @classmethod
    def parse(cls, text):
        if text.startswith("m_elliptic("):
            return cls("m_elliptic", int(text[len("m_elliptic("):-1]))
        return cls(text)


def classify_periodic(S, tol=1e-8):
    """Classify a period spectrum as hyperbolic, m-elliptic or degenerate."""
    if not isinstance(S, Spectrum):
        S = Spectrum(S)
    ev = S.eigenvalues
    on_circle = np.abs(np.abs(ev) - 1.0) <= tol
    if not on_circle.any():
        return Classification("hyperbolic")
    unit = ev[on_circle]
    if np.any(np.abs(unit.imag) <= tol):
        return Classification("degenerate")
    radius = max(tol, CLUSTER_RTOL)
    for k, lam in enumerate(unit):
        others = np.delete(ev, np.nonzero(on_circle)[0][k])
        if np.any(np.abs(others - lam) <= radius):
            return Classification("degenerate")
    return Classification("m_elliptic", len(unit) // 2)


def matrix_to_text(M):
    """Row-major decimal block: entries separated by spaces, rows by newlines."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    return "\n".join(" ".join(repr(float(v)) for v in row) for row in M)


def matrix_from_text(text):
    rows = [r.split() for r in text.strip().splitlines()]
    return np.array([[float(v) for v in r] for r in rows])
