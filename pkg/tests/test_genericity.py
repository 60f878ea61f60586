import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unistab.errors import ZeroVector
from unistab.genericity import (
    GenericityCertificate,
    Verdict,
    certify,
    fingerprint,
    in_good_set_by_enumeration,
    sample,
)
from unistab.group import close, orbit
from unistab.numerics import ToleranceConfig

from conftest import random_vector

SMALL = ["trivial_u2", "c2_u1", "c3_u1", "c4_u1", "c5_u1", "c2_u2", "v4_u2", "c3_u3", "c4_u2"]
TEST_GROUPS = ["c4_u2", "q8_u2", "d4_u2", "v4_u2", "s3_u3", "pauli_u2", "c5_u1", "binary_tetrahedral_u2"]


def test_fingerprint_examples(c4):
    assert np.allclose(fingerprint(c4, [1, 0]), [1, 0, -1, 0], atol=1e-12)
    assert np.allclose(fingerprint(c4, [1, 1 + 1j]), [3, -2j, -3, 2j], atol=1e-12)
    assert np.array_equal(fingerprint(c4, [0, 0]), np.zeros(4))


def test_certify_examples(c4):
    cert = certify(c4, [1, 1 + 1j])
    assert cert.verdict is Verdict.CERTIFIED and cert.spanning
    # gaps among -2i, -3, 2i: sqrt(13), 4, sqrt(13)
    assert cert.min_gap == pytest.approx(math.sqrt(13))
    assert cert.x_norm == pytest.approx(math.sqrt(3))

    cert = certify(c4, [1, 0])
    assert cert.verdict is Verdict.FINGERPRINT_COLLISION and cert.spanning
    assert cert.min_gap == 0

    cert = certify(c4, [1, 1j])
    assert cert.verdict is Verdict.NOT_SPANNING and not cert.spanning


def test_certify_zero_vector(c4):
    with pytest.raises(ZeroVector):
        certify(c4, [0, 0])


def test_certify_borderline(c4):
    # gap sqrt(13) lies in (eps_entry, margin] for this tolerance
    tol = ToleranceConfig(eps_entry=0.5, sep_factor=10)
    assert certify(c4, [1, 1 + 1j], tol).verdict is Verdict.BORDERLINE


def test_certificate_invariant_table(corpus):
    rng = np.random.default_rng(4)
    tol = ToleranceConfig()
    for name in TEST_GROUPS:
        g = corpus[name]
        for _ in range(20):
            x = random_vector(g.n, rng)
            if rng.random() < 0.5:
                x = x.real.astype(complex)
            c = certify(g, x)
            if c.verdict is Verdict.CERTIFIED:
                assert c.spanning and c.min_gap > tol.margin
            elif c.verdict is Verdict.NOT_SPANNING:
                assert not c.spanning
            elif c.verdict is Verdict.FINGERPRINT_COLLISION:
                assert c.spanning and c.min_gap <= tol.eps_entry
            else:
                assert tol.eps_entry < c.min_gap <= tol.margin


def test_certificate_round_trip():
    for cert in [
        GenericityCertificate(True, 1.5, Verdict.CERTIFIED, 1.0),
        GenericityCertificate(True, math.inf, Verdict.CERTIFIED, 2.0),
    ]:
        assert GenericityCertificate.from_dict(cert.to_dict()) == cert


@given(
    st.integers(0, 2**32 - 1),
    st.sampled_from(["c4_u2", "q8_u2", "d4_u2", "s3_u3"]),
    st.floats(0.1, 10),
    st.floats(0, 2 * math.pi),
)
@settings(max_examples=40, deadline=None)
def test_fingerprint_scaling(corpus, seed, name, r, theta):
    g = corpus[name]
    x = random_vector(g.n, np.random.default_rng(seed))
    lam = r * np.exp(1j * theta)
    assert np.allclose(fingerprint(g, lam * x), r**2 * fingerprint(g, x), atol=1e-9 * r**2 * (1 + np.abs(x) @ np.abs(x)))
    a, b = certify(g, x), certify(g, lam * x)
    assert a.spanning == b.spanning
    if a.verdict in (Verdict.CERTIFIED, Verdict.NOT_SPANNING):
        assert b.verdict == a.verdict
    assert b.min_gap == pytest.approx(r**2 * a.min_gap, rel=1e-9, abs=1e-12)
    unit = certify(g, np.exp(1j * theta) * x)
    assert unit.verdict == a.verdict


def test_fingerprint_conjugation_symmetry(corpus):
    rng = np.random.default_rng(8)
    for name in TEST_GROUPS:
        g = corpus[name]
        inv = g.inverse_indices
        for _ in range(100):
            f = fingerprint(g, random_vector(g.n, rng))
            assert np.allclose(f[inv], f.conj(), atol=1e-9)
            assert abs(f[0].imag) <= 1e-12 and f[0].real >= 0


def test_certified_implies_regular_orbit(corpus):
    rng = np.random.default_rng(9)
    for g in corpus.values():
        for _ in range(25):
            x = random_vector(g.n, rng)
            if certify(g, x).verdict is Verdict.CERTIFIED:
                assert len(orbit(g, x)) == g.order


def test_identity_collision_forces_other_collisions():
    # A x = x for A != I puts <Ax,x> on the identity value; the definition of the
    # good set ignores that pair, but here the orbit then fails to be regular and
    # the fingerprint collides on g, gA.
    g = close([np.diag([1, -1, 1]), np.array([[0, 0, 1], [0, 1, 0], [1, 0, 0]])])
    x = np.array([0.3 + 0.2j, 0, 0.9 - 0.4j])
    f = fingerprint(g, x)
    assert np.any(np.abs(f[1:] - f[0]) <= 1e-12)
    assert certify(g, x).verdict is not Verdict.CERTIFIED


def literal_good_set(g, x, probes):
    """Second literal oracle, written against the definition and nothing else."""
    import itertools

    ips = lambda v: np.array([np.vdot(v, a @ v) for a in g.elements])
    if np.linalg.matrix_rank(np.array([a @ x for a in g.elements]), tol=1e-8) < g.n:
        return False
    fx = ips(x)
    fps = [ips(v) for v in probes]
    for perm in itertools.permutations(range(1, g.order)):
        pi = (0,) + perm
        if pi == tuple(range(g.order)):
            continue
        nonempty = any(max(abs(f[pi[k]] - f[k]) for k in range(g.order)) > 1e-6 for f in fps)
        if nonempty and all(abs(fx[pi[k]] - fx[k]) <= 1e-9 for k in range(g.order)):
            return False
    return True


def special_vectors(n):
    out = [np.eye(n)[0], np.ones(n)]
    if n > 1:
        out += [np.eye(n)[0] + 1j * np.eye(n)[1], np.r_[1, 1 + 1j, np.zeros(n - 2)]]
    return out


def test_characterization_agrees_with_enumeration(corpus):
    rng = np.random.default_rng(10)
    for name in SMALL:
        g = corpus[name]
        probes = [random_vector(g.n, rng) for _ in range(6)]
        xs = [random_vector(g.n, rng) for _ in range(10)]
        xs += [random_vector(g.n, rng).real.astype(complex) for _ in range(10)]
        xs += special_vectors(g.n)
        for x in xs:
            fast = certify(g, x).verdict is Verdict.CERTIFIED
            assert fast == in_good_set_by_enumeration(g, x), (name, x)
            assert fast == literal_good_set(g, x, probes), (name, x)


def test_every_nontrivial_permutation_set_is_nonempty(corpus):
    # the reduction relies on O_pi being nonempty for pi != id when an orbit spans
    rng = np.random.default_rng(12)
    import itertools

    for name in ["c3_u1", "c4_u1", "c5_u1", "v4_u2", "c4_u2", "c3_u3"]:
        g = corpus[name]
        fps = [fingerprint(g, random_vector(g.n, rng)) for _ in range(4)]
        for perm in itertools.permutations(range(1, g.order)):
            pi = np.array((0,) + perm)
            if np.array_equal(pi, np.arange(g.order)):
                continue
            assert any(np.abs(f[pi] - f).max() > 1e-6 for f in fps)


def test_sample_examples(corpus, c4, q8):
    rep = sample(c4, 100, 42)
    assert rep.verdict_counts["Certified"] == 100
    assert sum(rep.verdict_counts.values()) == rep.sample_count == 100

    rep = sample(corpus["trivial_u2"], 10, 0)
    assert rep.verdict_counts["NotSpanning"] == 10

    rep = sample(q8, 100, 0, check_stabilizer=True)
    assert rep.verdict_counts["Certified"] == 100
    assert all(e.stabilizer_order == 8 and e.comparison == "Equal" for e in rep.per_sample)
    assert rep.violations == []


def test_sample_is_deterministic_and_order_independent(q8):
    a = sample(q8, 20, 123)
    b = sample(q8, 20, 123)
    assert all(np.array_equal(x.vector, y.vector) for x, y in zip(a.per_sample, b.per_sample))
    assert [e.certificate for e in a.per_sample] == [e.certificate for e in b.per_sample]
    # sample k depends only on (seed, k)
    c = sample(q8, 5, 123)
    assert all(np.array_equal(x.vector, y.vector) for x, y in zip(a.per_sample[:5], c.per_sample))
    d = sample(q8, 5, 124)
    assert not np.array_equal(a.per_sample[0].vector, d.per_sample[0].vector)


def test_sample_vectors_are_unit(q8):
    for e in sample(q8, 10, 5).per_sample:
        assert np.linalg.norm(e.vector) == pytest.approx(1.0)


def test_sample_rejects_bad_seed(c4):
    from unistab.errors import InputError

    with pytest.raises(InputError):
        sample(c4, 1, -1)
    with pytest.raises(InputError):
        sample(c4, 1, 2**64)
    assert sample(c4, 0, 2**64 - 1).sample_count == 0
