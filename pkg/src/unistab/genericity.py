"""Generic vectors: spanning orbit plus an injective fingerprint.

A vector ``x`` lies in the good set when its orbit spans C^n and, for every
permutation ``pi != id`` of the group fixing the identity, some ``A`` has
``<pi(A) x, x> != <A x, x>``. Those conditions hold for all such ``pi`` exactly
when ``A -> <A x, x>`` takes pairwise distinct values on the non-identity
elements: a collision ``A, B`` is preserved by the transposition ``(A B)``,
and an injective map is preserved by no nontrivial ``pi``.
:func:`in_good_set_by_enumeration` checks the permutation form literally and
is kept as an oracle for small groups.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import InputError, ZeroVector
from .group import FiniteMatrixGroup, orbit
from .numerics import DEFAULT_TOLERANCE, ToleranceConfig, as_vector, spans

__all__ = [
    "RNG_NAME",
    "GenericityCertificate",
    "SampleEntry",
    "SampleReport",
    "Verdict",
    "certify",
    "fingerprint",
    "in_good_set_by_enumeration",
    "random_unit_vector",
    "sample",
]

RNG_NAME = "numpy PCG64, SeedSequence([seed, sample_index])"


class Verdict(str, enum.Enum):
    CERTIFIED = "Certified"
    NOT_SPANNING = "NotSpanning"
    FINGERPRINT_COLLISION = "FingerprintCollision"
    BORDERLINE = "Borderline"

    def __str__(self):
        return self.value


def fingerprint(g: FiniteMatrixGroup, x) -> np.ndarray:
    """``values[k] = <A_k x, x>`` in the group's element order."""
    x = as_vector(x, g.n)
    return (g.elements @ x) @ x.conj()


@dataclass(frozen=True)
class GenericityCertificate:
    spanning: bool
    min_gap: float  # inf when there are fewer than two non-identity elements
    verdict: Verdict
    x_norm: float

    def to_dict(self) -> dict:
        return {
            "spanning": self.spanning,
            "min_gap": None if math.isinf(self.min_gap) else self.min_gap,
            "verdict": self.verdict.value,
            "x_norm": self.x_norm,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GenericityCertificate":
        gap = math.inf if d["min_gap"] is None else float(d["min_gap"])
        return cls(bool(d["spanning"]), gap, Verdict(d["verdict"]), float(d["x_norm"]))


def certify(g: FiniteMatrixGroup, x, tol: ToleranceConfig | None = None) -> GenericityCertificate:
    tol = g.tol if tol is None else tol
    x = as_vector(x, g.n)
    norm = float(np.linalg.norm(x))
    if norm <= tol.eps_entry:
        raise ZeroVector("cannot certify the zero vector")
    spanning = spans(g.elements @ x, g.n, tol)
    values = fingerprint(g, x)
    gap = _kernels.min_pairwise_gap(values[1:])
    if not spanning:
        verdict = Verdict.NOT_SPANNING
    elif gap <= tol.eps_entry:
        verdict = Verdict.FINGERPRINT_COLLISION
    elif gap <= tol.margin:
        verdict = Verdict.BORDERLINE
    else:
        verdict = Verdict.CERTIFIED
    return GenericityCertificate(spanning, gap, verdict, norm)


def in_good_set_by_enumeration(
    g: FiniteMatrixGroup,
    x,
    tol: ToleranceConfig | None = None,
    probes: int = 8,
    seed: int = 1,
) -> bool:
    """Literal membership test: spanning orbit and ``x`` in every nonempty ``O_pi``.

    Enumerates every permutation of the non-identity elements, which is only
    feasible for tiny groups. Nonemptiness of ``O_pi`` is decided by random
    probe vectors, since a nonempty set of this kind is dense.
    """
    tol = g.tol if tol is None else tol
    if g.order > 7:
        raise InputError("enumeration over all permutations is limited to groups of order <= 7")
    x = as_vector(x, g.n)
    if not spans(g.elements @ x, g.n, tol):
        return False
    rng = np.random.default_rng(seed)
    probe_prints = [fingerprint(g, random_unit_vector(g.n, rng)) for _ in range(probes)]
    fx = fingerprint(g, x)
    rest = list(range(1, g.order))
    for perm in itertools.permutations(rest):
        if list(perm) == rest:
            continue
        pi = np.array([0] + list(perm))
        nonempty = any(np.abs(fp[pi] - fp).max() > tol.margin for fp in probe_prints)
        if nonempty and np.abs(fx[pi] - fx).max() <= tol.eps_entry:
            return False
    return True


def random_unit_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform on the unit sphere of C^n (normalized standard complex Gaussian)."""
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return z / np.linalg.norm(z)


@dataclass
class SampleEntry:
    vector: np.ndarray
    certificate: GenericityCertificate
    stabilizer_order: int | None = None
    comparison: str | None = None

    def to_dict(self) -> dict:
        return {
            "vector": [[float(c.real), float(c.imag)] for c in self.vector],
            "certificate": self.certificate.to_dict(),
            "stabilizer_order": self.stabilizer_order,
            "comparison": self.comparison,
        }


@dataclass
class SampleReport:
    group_order: int
    sample_count: int
    seed: int
    verdict_counts: dict[str, int]
    per_sample: list[SampleEntry] = field(default_factory=list)
    rng: str = RNG_NAME

    @property
    def equal_count(self) -> int:
        return sum(1 for e in self.per_sample if e.comparison == "Equal")

    @property
    def violations(self) -> list[int]:
        """Indices of Certified samples whose stabilizer is not the group."""
        return [
            k
            for k, e in enumerate(self.per_sample)
            if e.certificate.verdict is Verdict.CERTIFIED and e.comparison not in (None, "Equal")
        ]


def sample(
    g: FiniteMatrixGroup,
    count: int,
    seed: int = 0,
    tol: ToleranceConfig | None = None,
    check_stabilizer: bool = False,
) -> SampleReport:
    """Certify ``count`` random unit vectors; optionally stabilize the Certified ones.

    Sample ``k`` is drawn from its own stream seeded with ``(seed, k)``, so the
    report does not depend on evaluation order.
    """
    from .stabilizer import compare, setwise_stabilizer

    tol = g.tol if tol is None else tol
    if count < 0:
        raise InputError("sample count must be non-negative")
    if not 0 <= seed < 2**64:
        raise InputError("seed must be a 64-bit unsigned integer")
    counts = {v.value: 0 for v in Verdict}
    entries = []
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        x = random_unit_vector(g.n, rng)
        cert = certify(g, x, tol)
        entry = SampleEntry(x, cert)
        if check_stabilizer and cert.verdict is Verdict.CERTIFIED:
            stab = setwise_stabilizer(orbit(g, x, tol), tol)
            entry.stabilizer_order = stab.order
            entry.comparison = compare(g, stab, tol).value
        counts[cert.verdict.value] += 1
        entries.append(entry)
    return SampleReport(g.order, count, seed, counts, entries)
