"""Periodic symplectic linear systems with transitions.

Words here are synthetic periodic cocycles: a base word stands for the
period cocycle of a point, and transition words are exact symplectic
matrices spliced between powers of base words.  Frames are ordered by
eigenvalue modulus, so positions ``n+1..2n`` (1-based) are the unstable
directions and the conjugate of position ``i`` is ``2n + 1 - i``.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ._validation import check_positive, check_positive_int
from .core import (
    SYMPL_TOL,
    Word,
    as_word,
    chi_min_plus,
    is_symplectic,
    lyapunov_vector_periodic,
    LyapunovVector,
    spectrum,
    standard_form,
    sum_positive_exponents,
    word_product,
)
from .errors import BudgetError, DimensionError, DomainError, NumericError


def _divisors(k):
    return [d for d in range(1, k) if k % d == 0]


def is_power(w, tol=1e-12):
    """True iff ``w == v^k`` for some word ``v`` and ``k > 1``."""
    w = as_word(w)
    letters = w.letters
    for d in _divisors(len(w)):
        if all(np.linalg.norm(letters[i] - letters[i % d], 2) <= tol
               for i in range(d, len(w))):
            return True
    return False


def words_close(w1, w2, eps):
    """Same length and every pair of letters within ``eps`` in operator norm."""
    w1, w2 = as_word(w1), as_word(w2)
    if len(w1) != len(w2) or w1.dim_half != w2.dim_half:
        return False
    return all(np.linalg.norm(a - b, 2) <= eps for a, b in zip(w1, w2))


@dataclass(frozen=True)
class EigenFrame:
    """Real simple eigendirections of a word product, ordered by modulus."""

    word: Word
    vectors: np.ndarray
    eigenvalues: np.ndarray

    def __post_init__(self):
        for name in ("vectors", "eigenvalues"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def dim_half(self):
        return self.vectors.shape[0] // 2

    def direction(self, i):
        """Unit vector spanning ``E_i`` (1-based index)."""
        return self.vectors[:, i - 1]

    def residual(self):
        P = word_product(self.word)
        return float(np.max(np.abs(P @ self.vectors - self.vectors * self.eigenvalues)))

    def conjugate(self, i):
        return 2 * self.dim_half + 1 - i

    def symplectic_basis(self):
        """Basis ``[e_1..e_n, f_1..f_n]`` with ``B^T J B = J``.

        ``e_j`` spans ``E_{n+j}`` and ``f_j`` spans its conjugate line.
        """
        n = self.dim_half
        J = standard_form(n)
        B = np.zeros((2 * n, 2 * n))
        for j in range(1, n + 1):
            e = self.direction(n + j)
            f = self.direction(self.conjugate(n + j))
            pairing = e @ J @ f
            if abs(pairing) < 1e-12:
                raise NumericError(f"frame is not symplectically normalizable at E_{n + j}")
            B[:, j - 1] = e
            B[:, n + j - 1] = f / pairing
        return B


def _normalize_sign(v):
    v = v / np.linalg.norm(v)
    k = np.argmax(np.abs(v))
    return v if v[k] > 0 else -v


def is_diagonalizable_real_simple(w, tol=1e-9):
    """Check for real, simple spectrum; return ``(flag, frame_or_None)``."""
    w = as_word(w)
    P = word_product(w)
    ev, vecs = np.linalg.eig(P)
    scale = np.maximum(1.0, np.abs(ev))
    if np.any(np.abs(ev.imag) > tol * scale):
        return False, None
    ev = ev.real
    order = np.lexsort((ev, np.abs(ev)))
    ev = ev[order]
    vecs = vecs[:, order].real
    gaps = np.abs(ev[:, None] - ev[None, :]) / np.maximum(np.abs(ev[:, None]), np.abs(ev[None, :]))
    np.fill_diagonal(gaps, np.inf)
    if np.any(gaps <= tol):
        return False, None
    vecs = np.column_stack([_normalize_sign(vecs[:, k]) for k in range(len(ev))])
    return True, EigenFrame(w, vecs, ev)


def _orth(A):
    return np.linalg.qr(A)[0]


def _ordered_invariant_subspace(P, threshold, below):
    if below:
        T, Z, sdim = scipy.linalg.schur(P, output="real", sort=lambda re, im: np.hypot(re, im) < threshold)
    else:
        T, Z, sdim = scipy.linalg.schur(P, output="real", sort=lambda re, im: np.hypot(re, im) > threshold)
    return Z[:, :sdim]


def _extract_splitting(P, i, tol):
    moduli = np.sort(np.abs(np.linalg.eigvals(P)))
    lo, hi = moduli[i - 1], moduli[i]
    if hi - lo <= tol * hi:
        raise DomainError(f"no invariant splitting of index {i}: moduli {lo:.6g} and {hi:.6g} are not separated")
    threshold = np.sqrt(lo * hi)
    E = _ordered_invariant_subspace(P, threshold, below=True)
    F = _ordered_invariant_subspace(P, threshold, below=False)
    if E.shape[1] != i or F.shape[1] != P.shape[0] - i:
        raise DomainError(f"no real invariant splitting of index {i}")
    return E, F


def _check_invariant(P, Q, tol):
    image = P @ Q
    leak = image - Q @ (Q.T @ image)
    return np.linalg.norm(leak, 2) <= tol * max(1.0, np.linalg.norm(image, 2))


def domination_test(w, i, m, tol=1e-9, splitting=None):
    """Test ``||A^m|E|| * ||A^{-m}|F|| <= 1/2`` at every cyclic start.

    Parameters
    ----------
    w : Word
        Periodic cocycle word.
    i : int
        Index of the splitting: ``dim E = i``.
    m : int
        Number of steps.
    splitting : array of shape (2n, 2n), optional
        Columns ``[:i]`` span ``E`` and ``[i:]`` span ``F`` at the start of
        the word.  By default the splitting is read off the product's
        spectrum, which requires a modulus gap at position ``i``.
    """
    w = as_word(w)
    d = 2 * w.dim_half
    if not 1 <= i <= d - 1:
        raise DomainError(f"split index must lie in [1, {d - 1}], got {i}")
    m = check_positive_int(m, "m")
    P = word_product(w)
    if splitting is None:
        E, F = _extract_splitting(P, i, tol)
    else:
        splitting = np.asarray(splitting, dtype=float)
        if splitting.shape != (d, d):
            raise DimensionError(f"splitting must have shape {(d, d)}")
        E, F = _orth(splitting[:, :i]), _orth(splitting[:, i:])
        if not (_check_invariant(P, E, 1e-8) and _check_invariant(P, F, 1e-8)):
            raise DomainError("supplied splitting is not invariant under the period product")
    k = len(w)
    for start in range(k):
        A = np.eye(d)
        for step in range(m):
            A = w[(start + step) % k] @ A
        norm_e = np.linalg.norm(A @ E, 2)
        F_image = _orth(A @ F)
        norm_f = np.linalg.norm(np.linalg.solve(A, F_image), 2)
        if norm_e * norm_f > 0.5:
            return False
        E = _orth(w[start] @ E)
        F = _orth(w[start] @ F)
    return True


def has_complex_rank(w, i, tol=1e-9):
    """Simple complex-conjugate pair at modulus positions ``i, i+1``."""
    w = as_word(w)
    d = 2 * w.dim_half
    if not 1 <= i <= d - 1:
        raise DomainError(f"rank index must lie in [1, {d - 1}], got {i}")
    ev = spectrum(word_product(w)).eigenvalues
    a, b = ev[i - 1], ev[i]
    r = abs(a)
    if abs(a.imag) <= tol * r or abs(a - np.conj(b)) > tol * max(1.0, r):
        return False
    others = np.delete(ev, [i - 1, i])
    if np.any(np.abs(others - a) <= tol * max(1.0, r)) or np.any(np.abs(others - b) <= tol * max(1.0, r)):
        return False
    if i >= 2 and not abs(ev[i - 2]) < r * (1 - tol):
        return False
    if i + 2 <= d and not abs(ev[i + 1]) > abs(b) * (1 + tol):
        return False
    return True


def transposition_transition(frame, i):
    """Symplectic matrix exchanging the lines ``E_i`` and ``E_{i+1}``.

    The conjugate lines are exchanged as well, every other eigendirection
    is fixed.  When ``i, i+1`` is the conjugate pair (only allowed for
    ``n = 1``) the map is a quarter turn sending ``E_i`` to ``E_{i+1}`` and
    ``E_{i+1}`` to ``-E_i``.
    """
    n = frame.dim_half
    B = frame.symplectic_basis()
    J = standard_form(n)
    return B @ _transposition_in_basis(frame, i) @ (-J @ B.T @ J)


def _transposition_in_basis(frame, i):
    n = frame.dim_half
    if not 1 <= i <= 2 * n - 1:
        raise DomainError(f"transposition index must lie in [1, {2 * n - 1}], got {i}")
    TB = np.eye(2 * n)
    if i == n:
        if n > 1:
            raise DomainError("E_n and E_{n+1} are a conjugate pair; only allowed for n = 1")
        # columns: e_1 -> -f_1, f_1 -> e_1 (i.e. E_1 -> E_2, E_2 -> -E_1)
        TB[:, 0] = 0.0
        TB[:, n] = 0.0
        TB[n, 0] = -1.0
        TB[0, n] = 1.0
    else:
        # unstable indices (0-based within e_1..e_n) of the swapped lines
        if i > n:
            a = i - n - 1
        else:
            a = frame.conjugate(i + 1) - n - 1
        perm = np.eye(n)
        perm[[a, a + 1]] = perm[[a + 1, a]]
        TB[:n, :n] = perm
        TB[n:, n:] = perm
    return TB


def transition_distance(frame, i):
    """Operator-norm distance of ``transposition_transition(frame, i)`` from the
    same permutation of the standard basis.

    Zero when the frame is the coordinate frame; used as a diagnostic of how
    far a transition is from a plain coordinate swap.
    """
    return float(np.linalg.norm(transposition_transition(frame, i) - _transposition_in_basis(frame, i), 2))


def _cycle_swaps(n, k):
    """Adjacent unstable transpositions (1-based frame indices) realizing the shift by ``k``."""
    target = [(j + k) % n for j in range(n)]
    arrangement = list(range(n))
    swaps = []
    changed = True
    while changed:
        changed = False
        for p in range(n - 1):
            if target[arrangement[p]] > target[arrangement[p + 1]]:
                arrangement[p], arrangement[p + 1] = arrangement[p + 1], arrangement[p]
                swaps.append(n + 1 + p)
                changed = True
    return swaps


def cycle_transition_letters(frame, k):
    """Transition letters of ``[S_k]`` in application order (empty for the identity)."""
    n = frame.dim_half
    if not 0 <= k <= n:
        raise DomainError(f"k must lie in [0, {n}], got {k}")
    return [transposition_transition(frame, i) for i in _cycle_swaps(n, k % n)]


def cycle_permutation(frame, k):
    """Matrix of ``S_k``: unstable line ``E_{n+j}`` goes to ``E_{n+(j+k mod n)}``."""
    M = np.eye(2 * frame.dim_half)
    for T in cycle_transition_letters(frame, k):
        M = T @ M
    return M


@dataclass(frozen=True)
class TransitionFamily:
    """Transition words between the points of a finite family of base words."""

    words: tuple
    transitions: dict
    eps: float = 0.0
    labels: tuple = field(default=None)

    def __post_init__(self):
        words = tuple(as_word(w) for w in self.words)
        object.__setattr__(self, "words", words)
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(range(len(words))))
        for key, letters in self.transitions.items():
            for A in letters:
                if not is_symplectic(A, SYMPL_TOL):
                    raise DomainError(f"transition {key} has a non-symplectic letter")

    def transition(self, target, source):
        return list(self.transitions.get((target, source), []))

    def concatenate(self, indices, powers):
        """Word ``[t^{i1,im}][M_im]^{am} ... [t^{i2,i1}][M_i1]^{a1}`` in orbit order."""
        if len(indices) != len(powers) or not indices:
            raise DomainError("indices and powers must be nonempty and of equal length")
        letters = []
        count = len(indices)
        for pos, (idx, power) in enumerate(zip(indices, powers)):
            letters.extend(self.words[idx].letters * check_positive_int(power, "power"))
            nxt = indices[(pos + 1) % count]
            letters.extend(self.transition(nxt, idx))
        return Word(letters)

    @classmethod
    def self_transpositions(cls, frame):
        """Family on one diagonalizable point with every allowed ``[t^i]``."""
        n = frame.dim_half
        transitions = {}
        for i in range(1, 2 * n):
            if i == n and n > 1:
                continue
            transitions[("x", i)] = [transposition_transition(frame, i)]
        return cls(words=(frame.word,), transitions=transitions)


def _transition_parts(frame):
    n = frame.dim_half
    return {k: cycle_transition_letters(frame, k) for k in range(n + 1)}


def mixing_word(frame, base=None, m=1):
    """Word ``[W_{n-1,m}] o ... o [W_{0,m}]`` with ``W_{k,m} = S_{n-k} M^m S_k``."""
    base = frame.word if base is None else as_word(base)
    if base.dim_half != frame.dim_half:
        raise DimensionError("base word and frame differ in dimension")
    m = check_positive_int(m, "m")
    n = frame.dim_half
    parts = _transition_parts(frame)
    letters = []
    for k in range(n):
        letters.extend(parts[k])
        letters.extend(base.letters * m)
        letters.extend(parts[n - k])
    return Word(letters)


def transition_length(frame):
    """Total number of transition letters ``K`` in a mixing word."""
    n = frame.dim_half
    return sum(len(_cycle_swaps(n, k % n)) + len(_cycle_swaps(n, (n - k) % n)) for k in range(n))


def mixing_period(frame, m):
    return frame.dim_half * m * len(frame.word) + transition_length(frame)


def transition_eigenfactors(frame):
    """``mu[j, k]``: factor of ``S_{n-k} S_k`` along ``E_{n+1+j}`` (Rayleigh quotient)."""
    n = frame.dim_half
    mu = np.empty((n, n))
    for k in range(n):
        S = cycle_permutation(frame, n - k) @ cycle_permutation(frame, k)
        for j in range(n):
            v = frame.direction(n + 1 + j)
            image = S @ v
            residual = np.linalg.norm(image - (v @ image) * v)
            if residual > 1e-8 * max(1.0, np.linalg.norm(image)):
                raise NumericError(f"S_{n - k} S_{k} does not fix E_{n + 1 + j}")
            mu[j, k] = v @ image
    return mu


def mixed_exponent_prediction(frame, m):
    """Closed-form Lyapunov vector of ``mixing_word(frame, m)``.

    Unstable exponents are the average of the base's unstable exponents plus
    ``(1/tau) sum_k log|mu_{j,k}|``; the stable half follows by symplectic
    pairing.
    """
    n = frame.dim_half
    base_chis = np.log(np.abs(frame.eigenvalues)) / len(frame.word)
    average = base_chis[n:].sum() / n
    tau = mixing_period(frame, check_positive_int(m, "m"))
    mu = transition_eigenfactors(frame)
    unstable = average + np.log(np.abs(mu)).sum(axis=1) / tau
    return LyapunovVector(np.concatenate([-unstable, unstable]), period=tau)


def mixing_gap(frame, m):
    """``|n * chi_min_plus(mixing word) - S(base)|``."""
    n = frame.dim_half
    target = sum_positive_exponents(lyapunov_vector_periodic(frame.word))
    measured = lyapunov_vector_periodic(mixing_word(frame, m=m))
    return abs(n * chi_min_plus(measured) - target)


def verify_mixing(frame, base=None, eps=1e-2, max_length=10_000):
    """Smallest tested ``m`` with mixing gap below ``eps``.

    ``m`` is doubled until the gap drops below ``eps`` and then bisected
    between the last failure and the first success.  The search stops with
    :class:`BudgetError` once the mixing word would exceed ``max_length``.

    Returns
    -------
    (m0, gap) : tuple of (int, float)
    """
    if base is not None and not words_close(base, frame.word, 0.0):
        ok, frame = is_diagonalizable_real_simple(base)
        if not ok:
            raise DomainError("base word is not diagonalizable with real simple spectrum")
    check_positive(eps, "eps")
    gaps = {}

    def gap(m):
        if m not in gaps:
            gaps[m] = mixing_gap(frame, m)
        return gaps[m]

    m = 1
    failed = 0
    while gap(m) >= eps:
        failed = m
        m *= 2
        if mixing_period(frame, m) > max_length:
            best = min(gaps.values())
            raise BudgetError(f"gap {best:.3e} still >= {eps} within word length {max_length}", best=best)
    lo, hi = failed, m
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if gap(mid) < eps:
            hi = mid
        else:
            lo = mid
    return hi, gaps[hi]
