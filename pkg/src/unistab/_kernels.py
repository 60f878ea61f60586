"""Inner loops with two interchangeable implementations.

The numba versions are used when numba imports and ``UNISTAB_NUMBA`` is not
set to ``0``; otherwise the numpy versions are used. Both are always
importable from ``IMPLEMENTATIONS`` so tests and benchmarks can compare them.
"""

import os

import numpy as np

__all__ = [
    "BACKEND",
    "IMPLEMENTATIONS",
    "NUMBA_AVAILABLE",
    "backtrack_automorphisms",
    "max_entry_dist",
    "min_pairwise_gap",
]


# ---------------------------------------------------------------- numpy path


def _np_max_entry_dist(stack, target):
    # stack: (k, d) complex, target: (d,) complex
    if stack.shape[0] == 0:
        return np.empty(0)
    return np.abs(stack - target[None, :]).max(axis=1)


def _np_min_pairwise_gap(values, chunk=1024):
    m = values.shape[0]
    best = np.inf
    cols = np.arange(m)
    for start in range(0, m, chunk):
        block = values[start : start + chunk]
        rows = np.arange(start, start + block.shape[0])
        d = np.abs(block[:, None] - values[None, :])
        d[cols[None, :] <= rows[:, None]] = np.inf
        best = min(best, float(d.min()))
    return best


def _np_backtrack(labels, cand, order, cap):
    m = order.shape[0]
    img = np.full(m, -1, dtype=np.int64)
    used = np.zeros(m, dtype=bool)
    found = []
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64), False
    stack = [None] * m
    pos = np.zeros(m, dtype=np.int64)

    def candidates(d):
        p = order[d]
        ok = cand[p] & ~used
        ok &= labels.diagonal() == labels[p, p]
        if d:
            prev = order[:d]
            imgs = img[prev]
            ok &= (labels[:, imgs] == labels[p, prev][None, :]).all(axis=1)
            ok &= (labels[imgs, :] == labels[prev, p][:, None]).all(axis=0)
        return np.flatnonzero(ok)

    d = 0
    stack[0] = candidates(0)
    pos[0] = 0
    while d >= 0:
        p = order[d]
        if img[p] >= 0:
            used[img[p]] = False
            img[p] = -1
        if pos[d] >= stack[d].shape[0]:
            d -= 1
            continue
        j = stack[d][pos[d]]
        pos[d] += 1
        img[p] = j
        used[j] = True
        if d == m - 1:
            found.append(img.copy())
            if len(found) > cap:
                return np.array(found), True
            continue
        d += 1
        stack[d] = candidates(d)
        pos[d] = 0
    if not found:
        return np.zeros((0, m), dtype=np.int64), False
    return np.array(found), False


# ---------------------------------------------------------------- numba path


def _nb_max_entry_dist(stack, target):
    # compare squared moduli, one sqrt per row
    k, dim = stack.shape
    out = np.empty(k)
    for a in range(k):
        worst = 0.0
        for b in range(dim):
            d = stack[a, b] - target[b]
            sq = d.real * d.real + d.imag * d.imag
            if sq > worst:
                worst = sq
        out[a] = np.sqrt(worst)
    return out


def _nb_min_pairwise_gap(values):
    m = values.shape[0]
    re = values.real.copy()
    im = values.imag.copy()
    best = np.inf
    for i in range(m):
        for j in range(i + 1, m):
            dr = re[i] - re[j]
            di = im[i] - im[j]
            sq = dr * dr + di * di
            if sq < best:
                best = sq
    return np.sqrt(best)


def _nb_backtrack(labels, cand, order, cap):
    m = order.shape[0]
    img = np.full(m, -1, dtype=np.int64)
    used = np.zeros(m, dtype=np.bool_)
    nxt = np.zeros(m + 1, dtype=np.int64)
    out = np.empty((16, max(m, 1)), dtype=np.int64)
    count = 0
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64), False
    d = 0
    while d >= 0:
        p = order[d]
        if img[p] >= 0:
            used[img[p]] = False
            img[p] = -1
        chosen = -1
        j = nxt[d]
        while j < m:
            if cand[p, j] and not used[j] and labels[j, j] == labels[p, p]:
                ok = True
                for e in range(d):
                    q = order[e]
                    t = img[q]
                    if labels[j, t] != labels[p, q] or labels[t, j] != labels[q, p]:
                        ok = False
                        break
                if ok:
                    chosen = j
                    break
            j += 1
        if chosen < 0:
            d -= 1
            continue
        nxt[d] = chosen + 1
        img[p] = chosen
        used[chosen] = True
        if d == m - 1:
            if count == out.shape[0]:
                grown = np.empty((2 * out.shape[0], m), dtype=np.int64)
                grown[:count] = out[:count]
                out = grown
            out[count] = img
            count += 1
            if count > cap:
                return out[:count].copy(), True
            continue
        d += 1
        nxt[d] = 0
    return out[:count, :m].copy(), False


# ---------------------------------------------------------------- dispatch

IMPLEMENTATIONS = {
    "numpy": {
        "max_entry_dist": _np_max_entry_dist,
        "min_pairwise_gap": _np_min_pairwise_gap,
        "backtrack": _np_backtrack,
    }
}

try:
    import numba

    IMPLEMENTATIONS["numba"] = {
        "max_entry_dist": numba.njit(cache=True)(_nb_max_entry_dist),
        "min_pairwise_gap": numba.njit(cache=True)(_nb_min_pairwise_gap),
        "backtrack": numba.njit(cache=True)(_nb_backtrack),
    }
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE and os.environ.get("UNISTAB_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off"):
    BACKEND = "numba"
else:
    BACKEND = "numpy"

_active = IMPLEMENTATIONS[BACKEND]


def max_entry_dist(stack, target):
    """Largest complex-modulus entry difference between each row of ``stack`` and ``target``."""
    return _active["max_entry_dist"](
        np.ascontiguousarray(stack, dtype=np.complex128),
        np.ascontiguousarray(target, dtype=np.complex128),
    )


def min_pairwise_gap(values):
    """Smallest ``|v_i - v_j|`` over i < j; ``inf`` for fewer than two values."""
    values = np.ascontiguousarray(values, dtype=np.complex128)
    if values.shape[0] < 2:
        return np.inf
    return float(_active["min_pairwise_gap"](values))


def backtrack_automorphisms(labels, cand, order, cap):
    """All permutations ``s`` with ``labels[s[i], s[j]] == labels[i, j]`` and ``cand[i, s[i]]``.

    Points are assigned in ``order``; images are tried in increasing index.
    Returns ``(perms, overflowed)``; ``overflowed`` is set once more than
    ``cap`` permutations have been found, and the search stops there.
    """
    return _active["backtrack"](
        np.ascontiguousarray(labels, dtype=np.int64),
        np.ascontiguousarray(cand, dtype=np.bool_),
        np.ascontiguousarray(order, dtype=np.int64),
        int(cap),
    )
