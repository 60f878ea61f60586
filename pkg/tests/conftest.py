import numpy as np
import pytest

from unistab import close, orbit, setwise_stabilizer
from unistab.cli import list_builtin, load_group_text, parse_group_file
from unistab.numerics import ToleranceConfig

R90 = np.array([[0, -1], [1, 0]], dtype=complex)

ACCEPTANCE_LINES = []


def load_builtin(name):
    return parse_group_file(load_group_text(f"builtin:{name}").decode()).close()


@pytest.fixture(scope="session")
def corpus():
    return {name: load_builtin(name) for name in list_builtin()}


@pytest.fixture(scope="session")
def c4():
    return close([R90])


@pytest.fixture(scope="session")
def q8():
    return close([np.diag([1j, -1j]), [[0, 1], [-1, 0]]])


@pytest.fixture(scope="session")
def d4():
    return close([R90, np.diag([1, -1])])


@pytest.fixture
def tol():
    return ToleranceConfig()


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load cached) numba kernels before anything is timed
    g = close([R90])
    setwise_stabilizer(orbit(g, [1, 1 + 1j]))


def random_unitary(n, rng):
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_vector(n, rng):
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
