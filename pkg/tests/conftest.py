from functools import lru_cache

import numpy as np
import pytest

import qkrylov as q


@lru_cache(maxsize=None)
def heisenberg_model(rows=3, cols=3, sector=True, j=1.0, h=0.2):
    lat = q.SpinLattice(rows, cols)
    H = q.build_heisenberg(lat, j, h)
    psi = q.antiferromagnetic_state(lat)
    if sector:
        H, psi = q.sector_restrict(H, psi)
    spec = q.spectral_decompose(H)
    return H, psi, spec, q.spectral_quantities(spec, psi)


@pytest.fixture(scope="session")
def model3x3():
    return heisenberg_model()


@pytest.fixture(scope="session")
def model2x2_full():
    return heisenberg_model(2, 2, sector=False)


def random_hermitian(rng, n, scale=1.0):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * (a + a.conj().T) / 2


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
