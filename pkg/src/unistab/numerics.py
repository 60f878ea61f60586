"""Complex linear algebra primitives and the tolerance policy.

All comparisons of complex numbers use the modulus of the difference against
an absolute tolerance. Inputs are O(1) in magnitude (unitary matrices, unit
vectors), so no relative tolerance is applied except for rank decisions.
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, fields
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, InconsistentForm, InputError, NonSquareMatrix

__all__ = [
    "ToleranceConfig",
    "as_matrix",
    "as_vector",
    "inner",
    "is_unitary",
    "spans",
    "spanning_basis",
    "polarize",
    "canonical_test_set",
    "quadratic_form",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Tolerance policy shared by every decision in the package.

    ``eps_entry`` decides equality of complex entries, ``eps_rank`` is the
    relative singular-value cutoff for rank, and anything closer than
    ``sep_factor * eps_entry`` but farther than ``eps_entry`` is treated as
    ambiguous rather than silently merged or split.
    """

    eps_entry: float = 1e-9
    eps_rank: float = 1e-8
    sep_factor: float = 10.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise InputError(f"tolerance {f.name} must be a positive finite number, got {v!r}")
        if self.sep_factor < 2:
            raise InputError(f"tolerance sep_factor must be >= 2, got {self.sep_factor!r}")

    @property
    def margin(self) -> float:
        return self.sep_factor * self.eps_entry

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "ToleranceConfig":
        """Defaults, then ``UNISTAB_EPS_ENTRY`` / ``UNISTAB_EPS_RANK`` / ``UNISTAB_SEP_FACTOR``, then ``overrides``."""
        environ = os.environ if environ is None else environ
        values = {}
        for f in fields(cls):
            raw = environ.get(f"UNISTAB_{f.name.upper()}")
            if raw is not None and raw.strip():
                try:
                    values[f.name] = float(raw)
                except ValueError as exc:
                    raise InputError(f"UNISTAB_{f.name.upper()}={raw!r} is not a number") from exc
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


DEFAULT_TOLERANCE = ToleranceConfig()


def as_vector(x, n: int | None = None) -> np.ndarray:
    v = np.asarray(x, dtype=np.complex128)
    if v.ndim != 1:
        raise DimensionMismatch(f"expected a vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise DimensionMismatch(f"expected a vector of dimension {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise InputError("vector has non-finite coordinates")
    return v


def as_matrix(m, n: int | None = None) -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NonSquareMatrix(f"expected a square matrix, got shape {a.shape}")
    if n is not None and a.shape[0] != n:
        raise DimensionMismatch(f"expected a {n}x{n} matrix, got {a.shape[0]}x{a.shape[1]}")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix has non-finite entries")
    return a


def inner(x, y) -> complex:
    """``<x, y> = y^* x``: linear in ``x``, conjugate-linear in ``y``."""
    x = np.asarray(x, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if x.shape != y.shape or x.ndim != 1:
        raise DimensionMismatch(f"inner product of shapes {x.shape} and {y.shape}")
    return complex(np.vdot(y, x))


def is_unitary(m, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or not np.all(np.isfinite(a)):
        return False
    dev = a.conj().T @ a - np.eye(a.shape[0])
    return bool(np.abs(dev).max(initial=0.0) <= tol.eps_entry)


def _as_rows(vectors, n: int) -> np.ndarray:
    rows = np.asarray(vectors, dtype=np.complex128)
    if rows.size == 0:
        return rows.reshape(0, n)
    if rows.ndim != 2 or rows.shape[1] != n:
        raise DimensionMismatch(f"expected vectors of dimension {n}, got array of shape {rows.shape}")
    return rows


def spans(vectors, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> bool:
    """True iff the vectors have rank ``n``.

    Equivalent to some n of them having nonzero determinant; decided on
    singular values, keeping those at or above ``eps_rank`` times the largest.
    """
    rows = _as_rows(vectors, n)
    if rows.shape[0] < n:
        return False
    s = np.linalg.svd(rows, compute_uv=False)
    if s[0] == 0.0:
        return False
    return bool(s[n - 1] >= tol.eps_rank * s[0])


def spanning_basis(vectors, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> np.ndarray | None:
    """Indices of ``n`` vectors forming a well-conditioned basis, or None.

    Greedy column pivoting: each step takes the vector with the largest
    component orthogonal to those already picked (lowest index on ties).
    """
    rows = _as_rows(vectors, n)
    if not spans(rows, n, tol):
        return None
    resid = rows.copy()
    picked = []
    for _ in range(n):
        norms = np.linalg.norm(resid, axis=1)
        norms[picked] = -1.0
        k = int(np.argmax(norms))
        picked.append(k)
        q = resid[k] / norms[k]
        resid = resid - np.outer(resid @ q.conj(), q)
    return np.array(picked, dtype=np.int64)


def canonical_test_set(n: int) -> list[np.ndarray]:
    """Vectors queried by :func:`polarize`, in query order.

    ``e_j`` for each j, then ``e_j + e_k`` for j < k, then ``e_j + i e_k`` for
    j < k, then ``n`` fixed probes used only for the consistency check.
    """
    eye = np.eye(n, dtype=np.complex128)
    out = [eye[j] for j in range(n)]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    out += [eye[j] + eye[k] for j, k in pairs]
    out += [eye[j] + 1j * eye[k] for j, k in pairs]
    out += _probes(n)
    return out


def _probes(n: int) -> list[np.ndarray]:
    k = np.arange(n)
    return [(1.0 + 0.5 * k + 1j * ((j + 2 * k) % 3 - 1)) / (1.0 + j) for j in range(n)]


def quadratic_form(m) -> Callable[[np.ndarray], complex]:
    """``v -> <M v, v>`` for a fixed matrix ``M``."""
    a = as_matrix(m)
    return lambda v: complex(np.vdot(v, a @ v))


def polarize(q: Callable[[np.ndarray], complex], n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> np.ndarray:
    """Recover ``M`` from its quadratic form ``q(v) = <M v, v>``.

    Uses ``B(x, y) = 1/4 sum_k i^k q(x + i^k y)`` with ``B(x, y) = <M x, y>``,
    so ``M[j, k] = B(e_k, e_j)``. Only the canonical test set is sampled; the
    missing samples ``q(x - y)`` and ``q(x - i y)`` follow from the
    parallelogram law ``q(x + c y) + q(x - c y) = 2 q(x) + 2 q(y)`` for
    ``|c| = 1``. Raises InconsistentForm if the result does not reproduce
    ``q`` on the probe vectors.
    """
    if n < 1:
        raise InputError(f"dimension must be positive, got {n}")
    tests = canonical_test_set(n)
    samples = [complex(q(v)) for v in tests]
    if not all(np.isfinite(s) for s in samples):
        raise InconsistentForm("quadratic form returned a non-finite value")
    diag = samples[:n]
    pairs = [(j, k) for j in range(n) for k in range(j + 1, n)]
    npair = len(pairs)
    plus = dict(zip(pairs, samples[n : n + npair]))
    plus_i = dict(zip(pairs, samples[n + npair : n + 2 * npair]))

    def q_combo(a, b, c):
        # q(e_a + c e_b) for c in {1, i, -1, -i}, from the sampled table
        j, k = min(a, b), max(a, b)
        par = 2 * diag[a] + 2 * diag[b]
        if a == j:
            table = {1: plus[j, k], 1j: plus_i[j, k]}
            table[-1] = par - table[1]
            table[-1j] = par - table[1j]
        else:
            # e_k + c e_j = c (e_j + conj(c) e_k), and |c| = 1
            table = {1: plus[j, k], -1j: plus_i[j, k]}
            table[-1] = par - table[1]
            table[1j] = par - table[-1j]
        return table[c]

    def sesq(a, b):
        return 0.25 * sum(c * q_combo(a, b, c) for c in (1, 1j, -1, -1j))

    out = np.diag(np.array(diag, dtype=np.complex128))
    for j, k in pairs:
        out[j, k] = sesq(k, j)
        out[k, j] = sesq(j, k)

    check = samples[n + 2 * npair :]
    for v, expected in zip(tests[n + 2 * npair :], check):
        got = complex(np.vdot(v, out @ v))
        if abs(got - expected) > tol.margin:
            raise InconsistentForm(
                f"reconstructed form deviates by {abs(got - expected):.3g} on a probe vector"
            )
    return out
