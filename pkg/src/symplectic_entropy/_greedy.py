"""Numba kernel for greedy (n, eps)-separated packing."""

import numba
import numpy as np

MAX_KEY_DIMS = 3
_MULT = np.array([73856093, 19349663, 83492791], dtype=np.int64)


@numba.njit(cache=True, nogil=True)
def _hash(key, k, mask):
    h = np.int64(0)
    for a in range(k):
        h ^= key[a] * _MULT[a]
    return h & mask


@numba.njit(cache=True, nogil=True)
def _find_or_insert(table_keys, table_head, key, k, mask, insert):
    slot = _hash(key, k, mask)
    while True:
        if table_head[slot] == -1:
            if insert:
                for a in range(k):
                    table_keys[slot, a] = key[a]
            return slot, False
        same = True
        for a in range(k):
            if table_keys[slot, a] != key[a]:
                same = False
                break
        if same:
            return slot, True
        slot = (slot + 1) & mask


@numba.njit(cache=True, nogil=True)
def _close(obs, i, j, nsteps, eps, periods):
    d = obs.shape[2]
    for t in range(nsteps + 1):
        for c in range(d):
            diff = abs(obs[i, t, c] - obs[j, t, c])
            p = periods[c]
            if p > 0.0 and diff > 0.5 * p:
                diff = p - diff
            if diff > eps:
                return False
    return True


@numba.njit(cache=True, nogil=True)
def greedy_separated(obs, nsteps, eps, periods, key_time, key_coord, initial):
    """Greedy maximal ``(nsteps, eps)``-separated subset of the rows of ``obs``.

    Parameters
    ----------
    obs : float64 array (S, T, d)
        Observed orbit segments; ``T > nsteps``.
    periods : float64 array (d,)
        Period of each observed coordinate, ``0`` for an unwrapped one.
    key_time, key_coord : int64 arrays (k,)
        Orbit times and coordinates hashed into cells of size ``>= eps``.
    initial : bool array (S,)
        Rows already known to be separated; they are kept unconditionally.

    Returns
    -------
    bool array (S,)
        Membership mask of the separated subset.
    """
    S = obs.shape[0]
    k = key_time.shape[0]
    cap = 1
    while cap < 2 * S + 2:
        cap *= 2
    mask = np.int64(cap - 1)
    table_keys = np.zeros((cap, k), dtype=np.int64)
    table_head = np.full(cap, -1, dtype=np.int64)
    nxt = np.full(S, -1, dtype=np.int64)
    cells = np.zeros(k, dtype=np.int64)
    size = np.zeros(k)
    for a in range(k):
        p = periods[key_coord[a]]
        if p > 0.0:
            cells[a] = max(1, int(np.floor(p / eps)))
            size[a] = p / cells[a]
        else:
            size[a] = eps
    keep = np.zeros(S, dtype=np.bool_)
    key = np.zeros(k, dtype=np.int64)
    nb = np.zeros(k, dtype=np.int64)
    offsets = np.zeros(k, dtype=np.int64)
    n_offsets = 3 ** k
    for sweep in range(2):
        for i in range(S):
            if sweep == 0 and not initial[i]:
                continue
            if sweep == 1 and initial[i]:
                continue
            for a in range(k):
                v = obs[i, key_time[a], key_coord[a]]
                key[a] = np.int64(np.floor(v / size[a]))
                if cells[a] > 0:
                    key[a] = key[a] % cells[a]
            if sweep == 1:
                conflict = False
                for code in range(n_offsets):
                    rest = code
                    for a in range(k):
                        offsets[a] = rest % 3 - 1
                        rest //= 3
                        nb[a] = key[a] + offsets[a]
                        if cells[a] > 0:
                            nb[a] = nb[a] % cells[a]
                    slot, found = _find_or_insert(table_keys, table_head, nb, k, mask, False)
                    if not found:
                        continue
                    j = table_head[slot]
                    while j != -1:
                        if _close(obs, i, j, nsteps, eps, periods):
                            conflict = True
                            break
                        j = nxt[j]
                    if conflict:
                        break
                if conflict:
                    continue
            slot, found = _find_or_insert(table_keys, table_head, key, k, mask, True)
            nxt[i] = table_head[slot]
            table_head[slot] = i
            keep[i] = True
    return keep


def key_layout(dim, nsteps):
    """Hash on the final observation, at most ``MAX_KEY_DIMS`` coordinates."""
    k = min(dim, MAX_KEY_DIMS)
    return np.full(k, nsteps, dtype=np.int64), np.arange(k, dtype=np.int64)
