"""Finite unitary matrix groups built from generators, and their orbits."""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import _kernels
from .errors import (
    AmbiguousIdentification,
    DimensionMismatch,
    InputError,
    NonUnitaryGenerator,
    OrderExceeded,
    ZeroVector,
)
from .numerics import DEFAULT_TOLERANCE, ToleranceConfig, as_matrix, as_vector, is_unitary

__all__ = [
    "DEFAULT_MAX_ORDER",
    "FiniteMatrixGroup",
    "NearIndex",
    "PointConfiguration",
    "close",
    "member_index",
    "orbit",
]

DEFAULT_MAX_ORDER = 20000


class NearIndex:
    """Tolerance-aware lookup of complex arrays of a fixed shape.

    Stored arrays are bucketed by a fixed real linear projection whose
    weights have unit l1 norm, so two arrays at entry distance ``d`` have
    keys at most ``d`` apart. With bucket width equal to the margin, every
    stored array within the margin of a query sits in one of three buckets.
    """

    def __init__(self, shape, tol: ToleranceConfig = DEFAULT_TOLERANCE, capacity: int = 64):
        self.shape = tuple(shape)
        self.tol = tol
        size = int(np.prod(self.shape, dtype=np.int64))
        rng = np.random.default_rng(0x5EED)
        w = rng.uniform(0.5, 1.5, size=2 * size)
        w /= np.abs(w).sum()
        self._w_re, self._w_im = w[:size], w[size:]
        self._cell = tol.margin
        self._data = np.empty((max(capacity, 1), size), dtype=np.complex128)
        self._count = 0
        self._buckets = defaultdict(list)

    def __len__(self):
        return self._count

    @property
    def data(self) -> np.ndarray:
        return self._data[: self._count].reshape((self._count,) + self.shape)

    def _bucket(self, flat) -> int:
        key = float(self._w_re @ flat.real + self._w_im @ flat.imag)
        return math.floor(key / self._cell)

    def find(self, a) -> int | None:
        """Index of the stored array within ``eps_entry`` of ``a``, or None.

        Raises AmbiguousIdentification when the nearest stored array lies in
        the band between ``eps_entry`` and the margin.
        """
        flat = np.asarray(a, dtype=np.complex128).ravel()
        b = self._bucket(flat)
        cands = self._buckets.get(b - 1, []) + self._buckets.get(b, []) + self._buckets.get(b + 1, [])
        if not cands:
            return None
        cands = np.array(cands, dtype=np.int64)
        dist = _kernels.max_entry_dist(self._data[cands], flat)
        close_enough = dist <= self.tol.eps_entry
        if close_enough.sum() > 1:
            raise AmbiguousIdentification("query matches more than one stored element")
        k = int(np.argmin(dist))
        if dist[k] <= self.tol.eps_entry:
            return int(cands[k])
        if dist[k] <= self.tol.margin:
            raise AmbiguousIdentification(
                f"nearest element at distance {dist[k]:.3g}, inside the margin band "
                f"({self.tol.eps_entry:g}, {self.tol.margin:g}]"
            )
        return None

    def add(self, a) -> int:
        """Store ``a`` unconditionally and return its index."""
        flat = np.asarray(a, dtype=np.complex128).ravel()
        if self._count == self._data.shape[0]:
            grown = np.empty((2 * self._data.shape[0], self._data.shape[1]), dtype=np.complex128)
            grown[: self._count] = self._data[: self._count]
            self._data = grown
        idx = self._count
        self._data[idx] = flat
        self._buckets[self._bucket(flat)].append(idx)
        self._count += 1
        return idx

    def insert_new(self, a) -> int:
        """Store ``a``, which must be separated from everything already stored."""
        if self.find(a) is not None:
            raise AmbiguousIdentification("element expected to be new is already present")
        return self.add(a)


@dataclass(frozen=True, eq=False)
class FiniteMatrixGroup:
    """A closed list of unitary matrices; ``elements[0]`` is the identity."""

    elements: np.ndarray  # (order, n, n) complex
    generator_indices: tuple[int, ...]
    tol: ToleranceConfig = DEFAULT_TOLERANCE
    _index: NearIndex = field(default=None, repr=False)

    def __post_init__(self):
        if self._index is None:
            idx = NearIndex(self.elements.shape[1:], self.tol, capacity=len(self.elements))
            for a in self.elements:
                idx.insert_new(a)
            object.__setattr__(self, "_index", idx)

    @property
    def n(self) -> int:
        return self.elements.shape[1]

    @property
    def order(self) -> int:
        return self.elements.shape[0]

    def __len__(self):
        return self.order

    @property
    def generators(self) -> np.ndarray:
        return self.elements[list(self.generator_indices)]

    @cached_property
    def inverse_indices(self) -> np.ndarray:
        """``inverse_indices[k]`` is the index of ``elements[k]^*``."""
        out = np.empty(self.order, dtype=np.int64)
        for k, a in enumerate(self.elements):
            j = self._index.find(a.conj().T)
            if j is None:
                raise AmbiguousIdentification(f"adjoint of element {k} is not in the group")
            out[k] = j
        return out

    def member_index(self, m) -> int | None:
        m = as_matrix(m, self.n)
        return self._index.find(m)

    def __contains__(self, m) -> bool:
        return self.member_index(m) is not None


def close(generators, tol: ToleranceConfig = DEFAULT_TOLERANCE, max_order: int = DEFAULT_MAX_ORDER) -> FiniteMatrixGroup:
    """Close a list of unitary generators under multiplication (Dimino).

    The group is grown one generator at a time. With ``H`` the group of the
    generators seen so far, new right cosets ``H g`` are discovered
    breadth-first from coset representatives multiplied on the right by each
    generator. The element order depends only on the generator order.
    """
    gens = [as_matrix(g) for g in generators]
    if not gens:
        raise InputError("at least one generator is required")
    n = gens[0].shape[0]
    for k, g in enumerate(gens):
        if g.shape[0] != n:
            raise DimensionMismatch(f"generator {k} is {g.shape[0]}x{g.shape[0]}, expected {n}x{n}")
        if not is_unitary(g, tol):
            raise NonUnitaryGenerator(f"generator {k} is not unitary within {tol.eps_entry:g}")
    if max_order < 1:
        raise InputError("max_order must be positive")

    index = NearIndex((n, n), tol)
    index.add(np.eye(n, dtype=np.complex128))
    gen_idx = []
    for k, s in enumerate(gens):
        found = index.find(s)
        if found is not None:
            gen_idx.append(found)
            continue
        prev = index.data.copy()  # the subgroup generated so far
        active = gens[: k + 1]
        reps = [np.eye(n, dtype=np.complex128)]
        head = 0
        while head < len(reps):
            r = reps[head]
            head += 1
            for t in active:
                e = r @ t
                if index.find(e) is not None:
                    continue
                if len(index) + len(prev) > max_order:
                    raise OrderExceeded(
                        f"closure exceeds max_order={max_order}; the group may be infinite"
                    )
                reps.append(e)
                for a in prev @ e:
                    index.insert_new(a)
        gen_idx.append(index.find(s))
    return FiniteMatrixGroup(index.data.copy(), tuple(gen_idx), tol, index)


def member_index(g: FiniteMatrixGroup, m, tol: ToleranceConfig | None = None) -> int | None:
    """Index of the unique element of ``g`` within ``eps_entry`` of ``m``, or None."""
    if tol is not None and tol != g.tol:
        idx = NearIndex((g.n, g.n), tol, capacity=g.order)
        for a in g.elements:
            idx.add(a)
        return idx.find(as_matrix(m, g.n))
    return g.member_index(m)


@dataclass(frozen=True, eq=False)
class PointConfiguration:
    """Distinct points of C^n, optionally remembering how an orbit produced them."""

    points: np.ndarray  # (m, n) complex
    multiplicities: np.ndarray  # (m,) int
    source_map: np.ndarray | None = None  # group-element index -> point index

    @property
    def n(self) -> int:
        return self.points.shape[1]

    def __len__(self):
        return self.points.shape[0]

    @cached_property
    def gram(self) -> np.ndarray:
        """``gram[i, j] = <p_i, p_j> = p_j^* p_i``."""
        return self.points.conj() @ self.points.T

    @classmethod
    def from_points(cls, points, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> "PointConfiguration":
        """Build a configuration from points that must be pairwise separated."""
        pts = np.asarray(points, dtype=np.complex128)
        if pts.ndim != 2 or pts.shape[0] == 0:
            raise InputError(f"expected a non-empty (m, n) array of points, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise InputError("points have non-finite coordinates")
        idx = NearIndex(pts.shape[1:], tol, capacity=len(pts))
        for p in pts:
            idx.insert_new(p)
        return cls(pts.copy(), np.ones(len(pts), dtype=np.int64))


def orbit(g: FiniteMatrixGroup, x, tol: ToleranceConfig | None = None) -> PointConfiguration:
    """The orbit ``{A x : A in g}`` with multiplicities, in element order."""
    tol = g.tol if tol is None else tol
    x = as_vector(x, g.n)
    if np.linalg.norm(x) <= tol.eps_entry:
        raise ZeroVector("orbit of the zero vector")
    images = g.elements @ x
    index = NearIndex((g.n,), tol)
    source = np.empty(g.order, dtype=np.int64)
    counts = []
    for k, y in enumerate(images):
        j = index.find(y)
        if j is None:
            j = index.add(y)
            counts.append(0)
        counts[j] += 1
        source[k] = j
    counts = np.array(counts, dtype=np.int64)
    if np.any(counts != counts[0]) or counts[0] * len(counts) != g.order:
        raise AmbiguousIdentification(
            "orbit multiplicities are unequal; point identification is unstable at this tolerance"
        )
    return PointConfiguration(index.data.copy(), counts, source)
