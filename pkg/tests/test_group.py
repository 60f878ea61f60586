import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unistab.errors import AmbiguousIdentification, InputError, NonUnitaryGenerator, OrderExceeded, ZeroVector
from unistab.group import NearIndex, PointConfiguration, close, member_index, orbit
from unistab.numerics import ToleranceConfig, spans

from conftest import R90, random_vector


def naive_closure(gens, digits=8):
    """Oracle: multiply everything by everything until nothing new appears."""
    key = lambda m: tuple(np.round(m, digits).ravel().tolist())
    n = gens[0].shape[0]
    found = {key(np.eye(n)): np.eye(n, dtype=complex)}
    frontier = list(found.values())
    while frontier:
        new = []
        for a in frontier:
            for g in gens:
                b = a @ g
                if key(b) not in found:
                    found[key(b)] = b
                    new.append(b)
        frontier = new
    return found


def test_close_c4_order_and_element_order(c4):
    assert c4.order == 4
    expected = [np.eye(2), R90, R90 @ R90, R90 @ R90 @ R90]
    for a, b in zip(c4.elements, expected):
        assert np.abs(a - b).max() <= 1e-12
    assert c4.generator_indices == (1,)


def test_close_q8(q8):
    gens = [np.diag([1j, -1j]), np.array([[0, 1], [-1, 0]], dtype=complex)]
    oracle = naive_closure(gens)
    assert q8.order == len(oracle) == 8
    for m in oracle.values():
        assert q8.member_index(m) is not None


def test_close_trivial():
    g = close([np.eye(2)])
    assert g.order == 1 and g.generator_indices == (0,)


def test_close_corpus_matches_naive_oracle(corpus):
    for name, g in corpus.items():
        oracle = naive_closure(list(g.generators))
        assert g.order == len(oracle), name


def test_identity_first_and_unitary(corpus):
    for g in corpus.values():
        assert np.abs(g.elements[0] - np.eye(g.n)).max() <= 1e-9
        for a in g.elements:
            assert np.abs(a.conj().T @ a - np.eye(g.n)).max() <= 1e-9


def test_closure_table_and_separation(corpus, tol):
    for g in corpus.values():
        for a in g.elements:
            prods = a @ g.elements
            for p in prods:
                dist = np.abs(g.elements - p).max(axis=(1, 2))
                assert (dist <= tol.eps_entry).sum() == 1
        dist = np.abs(g.elements[:, None] - g.elements[None]).max(axis=(2, 3))
        off = dist[~np.eye(g.order, dtype=bool)]
        assert off.size == 0 or off.min() > tol.margin


def test_inverse_closure(corpus):
    for g in corpus.values():
        inv = g.inverse_indices
        for k, a in enumerate(g.elements):
            assert member_index(g, a.conj().T) == inv[k]
            assert np.abs(g.elements[inv[k]] @ a - np.eye(g.n)).max() <= 1e-9


def test_close_is_idempotent(corpus):
    for g in corpus.values():
        again = close(list(g.elements))
        assert again.order == g.order
        for a in again.elements:
            assert g.member_index(a) is not None


def test_close_is_deterministic(q8):
    again = close([np.diag([1j, -1j]), [[0, 1], [-1, 0]]])
    assert np.array_equal(again.elements, q8.elements)


def test_redundant_generator_recorded():
    g = close([R90, R90 @ R90])
    assert g.order == 4 and g.generator_indices == (1, 2)


def test_close_rejects_non_unitary():
    with pytest.raises(NonUnitaryGenerator):
        close([np.diag([1, 2])])


def test_close_rejects_mixed_dimensions():
    with pytest.raises(InputError):
        close([np.eye(2), np.eye(3)])
    with pytest.raises(InputError):
        close([])


def test_close_infinite_group_hits_max_order():
    c, s = np.cos(1.0), np.sin(1.0)
    with pytest.raises(OrderExceeded):
        close([[[c, -s], [s, c]]], max_order=50)


def test_close_near_identity_is_ambiguous():
    with pytest.raises(AmbiguousIdentification):
        close([np.diag([1, np.exp(5e-9j)])])


def test_member_index_examples(c4, q8, tol):
    assert member_index(c4, R90) == 1
    assert member_index(c4, np.diag([1, -1])) is None
    prod = q8.generators[0] @ q8.generators[1]
    k = member_index(q8, prod, tol)
    assert k is not None and np.abs(q8.elements[k] - prod).max() <= tol.eps_entry


def test_member_index_tolerance_band(c4):
    near = R90 + 1e-12
    assert c4.member_index(near) == 1
    with pytest.raises(AmbiguousIdentification):
        c4.member_index(R90 + 5e-9)
    assert c4.member_index(R90 + 1e-6) is None
    loose = ToleranceConfig(eps_entry=1e-5)
    assert member_index(c4, R90 + 1e-6, loose) == 1


def test_near_index_finds_across_bucket_boundaries():
    tol = ToleranceConfig()
    idx = NearIndex((3,), tol)
    rng = np.random.default_rng(5)
    base = [random_vector(3, rng) for _ in range(200)]
    for b in base:
        idx.add(b)
    for k, b in enumerate(base):
        jitter = (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3)) * 3e-10
        assert idx.find(b + jitter) == k


# ---------------------------------------------------------------- orbits


def test_orbit_examples(c4):
    p = orbit(c4, [1, 0])
    expected = np.array([[1, 0], [0, 1], [-1, 0], [0, -1]])
    assert np.abs(p.points - expected).max() <= 1e-12
    assert p.multiplicities.tolist() == [1, 1, 1, 1]

    p = orbit(c4, [1, 1 + 1j])
    assert len(p) == 4 and spans(p.points, 2)
    # det of the first two orbit points is 1 + 2i
    assert np.linalg.det(p.points[:2].T) == pytest.approx(1 + 2j)

    g = close([np.eye(2)])
    p = orbit(g, [0.3, 2j])
    assert len(p) == 1 and p.multiplicities.tolist() == [1]


def test_orbit_zero_vector(c4):
    with pytest.raises(ZeroVector):
        orbit(c4, [0, 0])


def test_orbit_with_point_stabilizer(corpus):
    g = corpus["v4_u2"]
    p = orbit(g, [1, 0])
    assert len(p) == 2 and p.multiplicities.tolist() == [2, 2]
    assert p.source_map.tolist() == [0, 0, 1, 1]


@given(st.integers(0, 2**32 - 1), st.sampled_from(["c4_u2", "q8_u2", "d4_u2", "s3_u3", "pauli_u2", "c3_u1"]))
@settings(max_examples=30, deadline=None)
def test_orbit_invariants(corpus, seed, name):
    g = corpus[name]
    rng = np.random.default_rng(seed)
    x = random_vector(g.n, rng)
    p = orbit(g, x)
    assert p.multiplicities.sum() == g.order
    assert g.order % len(p) == 0
    stab = sum(1 for a in g.elements if np.abs(a @ x - x).max() <= 1e-9)
    assert len(p) * stab == g.order
    a = g.elements[rng.integers(g.order)]
    q = orbit(g, a @ x)
    for pt in q.points:
        assert np.abs(p.points - pt).max(axis=1).min() <= 1e-9


def test_orbit_invariants_special_vectors(corpus):
    for name, x in [("d4_u2", [1, 0]), ("d4_u2", [1, 1]), ("s3_u3", [1, 1, 0]), ("s3_u3", [1, 1, 1])]:
        g = corpus[name]
        p = orbit(g, x)
        stab = sum(1 for a in g.elements if np.abs(a @ np.array(x) - x).max() <= 1e-9)
        assert len(p) * stab == g.order


def test_point_configuration_rejects_near_duplicates():
    with pytest.raises(AmbiguousIdentification):
        PointConfiguration.from_points([[1, 0], [1 + 5e-9, 0]])
    with pytest.raises(AmbiguousIdentification):
        PointConfiguration.from_points([[1, 0], [1, 0]])
    p = PointConfiguration.from_points([[1, 0], [0, 1]])
    assert np.array_equal(p.gram, np.eye(2))
