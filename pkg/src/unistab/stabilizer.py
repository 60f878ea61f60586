"""Setwise stabilizers of spanning point configurations.

A unitary ``C`` with ``C P = P`` permutes the points, and the permutation
preserves every inner product ``<p_i, p_j>``. Conversely, when the points
span C^n, a permutation preserving the Gram matrix extends to exactly one
linear map, and that map is unitary. The stabilizer is therefore computed as
the automorphism group of the Gram matrix, each automorphism lifted to a
matrix and checked.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AmbiguousIdentification, DimensionMismatch, NotIsometric, NotSpanning, OrderExceeded, TooManyPoints
from .group import FiniteMatrixGroup, NearIndex, PointConfiguration
from .numerics import DEFAULT_TOLERANCE, ToleranceConfig, is_unitary, spanning_basis

__all__ = [
    "DEFAULT_MAX_STABILIZER_ORDER",
    "Comparison",
    "StabilizerResult",
    "brute_stabilizer",
    "compare",
    "coset_representatives",
    "fixes_point",
    "gram",
    "gram_automorphisms",
    "lift",
    "setwise_stabilizer",
]

DEFAULT_MAX_STABILIZER_ORDER = 10000


class Comparison(str, enum.Enum):
    EQUAL = "Equal"
    PROPER_SUPERGROUP = "ProperSupergroup"
    PROPER_SUBGROUP = "ProperSubgroup"
    INCOMPARABLE = "Incomparable"

    def __str__(self):
        return self.value


@dataclass(frozen=True, eq=False)
class StabilizerResult:
    elements: np.ndarray  # (order, n, n), identity first
    permutations: np.ndarray  # (order, m); elements[k] @ p_i == p_{permutations[k, i]}
    verdict_vs_reference: Comparison | None = None

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    @property
    def n(self) -> int:
        return self.elements.shape[1]


def gram(p: PointConfiguration) -> np.ndarray:
    return p.gram


def _entry_labels(values: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    """Integer labels for complex values: equal within ``eps_entry``, distinct beyond the margin."""
    flat = values.ravel()
    cell = tol.eps_entry / 2
    keys = np.stack([np.round(flat.real / cell), np.round(flat.imag / cell)], axis=1)
    _, first, inverse = np.unique(keys, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    reps = flat[first]
    parent = np.arange(len(reps))

    def root(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    order = np.argsort(reps.real, kind="stable")
    srt = reps[order]
    for a in range(len(srt)):
        b = a + 1
        while b < len(srt) and srt[b].real - srt[a].real <= tol.margin:
            d = abs(srt[b] - srt[a])
            if d <= tol.eps_entry:
                ra, rb = root(order[a]), root(order[b])
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
            elif d <= tol.margin:
                raise AmbiguousIdentification(
                    f"Gram entries {srt[a]:.6g} and {srt[b]:.6g} are {d:.3g} apart, inside the margin band"
                )
            b += 1
    roots = np.array([root(a) for a in range(len(reps))])
    per_value = roots[inverse]
    # relabel by first appearance so labels do not depend on the rounding grid
    _, first_seen, dense = np.unique(per_value, return_index=True, return_inverse=True)
    rank = np.empty(len(first_seen), dtype=np.int64)
    rank[np.argsort(first_seen, kind="stable")] = np.arange(len(first_seen))
    return rank[dense.ravel()].reshape(values.shape)


def _refine(labels: np.ndarray) -> np.ndarray:
    """Equitable colouring of points from the label matrix, by iterated row signatures."""
    colors = np.unique(labels.diagonal(), return_inverse=True)[1].ravel()
    while True:
        k = int(colors.max()) + 1
        pairs = np.sort(labels * k + colors[None, :], axis=1)
        sig = np.concatenate([colors[:, None], pairs], axis=1)
        new = np.unique(sig, axis=0, return_inverse=True)[1].ravel()
        if new.max() == colors.max():
            return new
        colors = new


def gram_automorphisms(
    p: PointConfiguration,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
    cap: int = DEFAULT_MAX_STABILIZER_ORDER,
) -> np.ndarray:
    """All Gram-preserving permutations of the points, sorted lexicographically.

    Gram entries are first turned into exact integer labels, points are
    coloured by partition refinement on those labels, and a backtracking
    search assigns points class by class (smallest class first, then by
    index), trying images in increasing index.
    """
    labels = _entry_labels(p.gram, tol)
    colors = _refine(labels)
    sizes = np.bincount(colors)
    order = np.lexsort((np.arange(len(colors)), colors, sizes[colors]))
    cand = colors[:, None] == colors[None, :]
    perms, overflowed = _kernels.backtrack_automorphisms(labels, cand, order, cap)
    if overflowed:
        raise OrderExceeded(f"more than {cap} Gram automorphisms")
    perms = np.asarray(perms, dtype=np.int64)
    if len(perms) > 1:
        perms = perms[np.lexsort(perms.T[::-1])]
    return perms


class _Lifter:
    def __init__(self, p: PointConfiguration, tol: ToleranceConfig):
        basis = spanning_basis(p.points, p.n, tol)
        if basis is None:
            raise NotSpanning("points do not span; their stabilizer is not finite")
        self.p = p
        self.tol = tol
        self.basis = basis
        self.inv = np.linalg.inv(p.points[basis].T)

    def __call__(self, sigma: np.ndarray) -> np.ndarray:
        pts = self.p.points
        c = pts[sigma[self.basis]].T @ self.inv
        moved = pts @ c.T
        err = np.abs(moved - pts[sigma]).max()
        if err > self.tol.eps_entry:
            raise NotIsometric(f"lifted map misses an image point by {err:.3g}")
        if not is_unitary(c, self.tol):
            raise NotIsometric("lifted map is not unitary")
        return c


def _check_permutation(sigma, m: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (m,) or not np.array_equal(np.sort(sigma), np.arange(m)):
        raise DimensionMismatch(f"not a permutation of {m} points")
    return sigma


def lift(p: PointConfiguration, sigma, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> np.ndarray:
    """The unique matrix ``C`` with ``C p_i = p_{sigma[i]}``, verified unitary."""
    sigma = _check_permutation(sigma, len(p))
    g = p.gram
    if np.abs(g[np.ix_(sigma, sigma)] - g).max() > tol.eps_entry:
        raise NotIsometric("permutation does not preserve the Gram matrix")
    return _Lifter(p, tol)(sigma)


def _result(p: PointConfiguration, perms: np.ndarray, tol: ToleranceConfig) -> StabilizerResult:
    lifter = _Lifter(p, tol)
    mats = np.array([lifter(s) for s in perms]).reshape(len(perms), p.n, p.n)
    return StabilizerResult(mats, perms)


def setwise_stabilizer(
    p: PointConfiguration,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
    cap: int = DEFAULT_MAX_STABILIZER_ORDER,
) -> StabilizerResult:
    """All unitary matrices mapping the point set onto itself.

    Raises NotSpanning when the points do not span C^n, since the stabilizer
    then contains a continuum.
    """
    if spanning_basis(p.points, p.n, tol) is None:
        raise NotSpanning("points do not span; their stabilizer is not finite")
    return _result(p, gram_automorphisms(p, tol, cap), tol)


def brute_stabilizer(
    p: PointConfiguration,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
    max_points: int = 8,
) -> StabilizerResult:
    """Reference stabilizer: tries every permutation of the points."""
    m = len(p)
    if m > max_points:
        raise TooManyPoints(f"{m} points exceeds the exhaustive limit of {max_points}")
    if spanning_basis(p.points, p.n, tol) is None:
        raise NotSpanning("points do not span; their stabilizer is not finite")
    perms = np.array(list(itertools.permutations(range(m))), dtype=np.int64).reshape(-1, m)
    g = p.gram
    moved = g[perms[:, :, None], perms[:, None, :]]
    keep = np.abs(moved - g[None]).reshape(len(perms), -1).max(axis=1) <= tol.eps_entry
    return _result(p, perms[keep], tol)


def _index_of(elements: np.ndarray, tol: ToleranceConfig) -> NearIndex:
    idx = NearIndex(elements.shape[1:], tol, capacity=len(elements))
    for a in elements:
        idx.insert_new(a)
    return idx


def compare(g: FiniteMatrixGroup, h: StabilizerResult, tol: ToleranceConfig | None = None) -> Comparison:
    """How ``h`` relates to ``g`` as a set of matrices."""
    tol = g.tol if tol is None else tol
    if g.n != h.n:
        raise DimensionMismatch(f"comparing groups on C^{g.n} and C^{h.n}")
    h_index = _index_of(h.elements, tol)
    h_in_g = all(g.member_index(c) is not None for c in h.elements)
    g_in_h = all(h_index.find(a) is not None for a in g.elements)
    if h_in_g and g_in_h:
        return Comparison.EQUAL
    if g_in_h:
        return Comparison.PROPER_SUPERGROUP
    if h_in_g:
        return Comparison.PROPER_SUBGROUP
    return Comparison.INCOMPARABLE


def coset_representatives(g: FiniteMatrixGroup, h: StabilizerResult, tol: ToleranceConfig | None = None) -> list[int]:
    """Indices into ``h.elements`` of one element per left coset ``C g``, for ``g`` inside ``h``.

    Cosets are visited in element order, so the first representative is the identity.
    """
    tol = g.tol if tol is None else tol
    h_index = _index_of(h.elements, tol)
    covered = np.zeros(h.order, dtype=bool)
    reps = []
    for k, c in enumerate(h.elements):
        if covered[k]:
            continue
        reps.append(k)
        for a in c @ g.elements:
            j = h_index.find(a)
            if j is None:
                raise DimensionMismatch("reference group is not contained in the stabilizer")
            covered[j] = True
    return reps


def fixes_point(c: np.ndarray, x: np.ndarray, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    return bool(np.abs(c @ x - x).max() <= tol.eps_entry)

