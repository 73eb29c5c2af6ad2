import numpy as np
import pytest

from entmap.states import bell, random_mixed, werner


@pytest.fixture
def bell_rho():
    return bell(0).density()


@pytest.fixture
def singlet():
    return werner(1.0)


@pytest.fixture
def product_rho():
    a = np.array([[0.7, 0.2 - 0.1j], [0.2 + 0.1j, 0.3]])
    b = np.array([[0.4, 0.05j], [-0.05j, 0.6]])
    from entmap.states import product_mixed

    return product_mixed(a, b)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_hermitian(rng, n):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return g + g.conj().T


@pytest.fixture
def mixed_states():
    return [random_mixed((2, 2), (7, i), rank=1 + i % 4) for i in range(20)]


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
