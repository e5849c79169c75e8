import numpy as np
import pytest

from lgidots.oracle import fock_annihilators
from lgidots.model import (
    DEFAULT_LEFT, DEFAULT_RIGHT, DotHamiltonian, make_parallel_config, make_series_config,
)


@pytest.fixture
def dots():
    return DotHamiltonian.from_levels(1.0, 1.0, 0.5)


@pytest.fixture
def fig4a_weak(dots):
    """Series device at Gamma^{L,R} = 0.2, W = 1, mu = +-5, kT = 0.1."""
    return make_series_config(0.2, 0.2, dots, DEFAULT_LEFT, DEFAULT_RIGHT)


@pytest.fixture
def parallel_03(dots):
    return make_parallel_config(0.3, 0.3, dots, DEFAULT_LEFT, DEFAULT_RIGHT)


def random_dots(rng, scale=2.0):
    e11, e22 = rng.uniform(-scale, scale, 2)
    e12 = complex(*rng.uniform(-scale, scale, 2))
    return DotHamiltonian.from_levels(e11, e22, e12)


def superposition_rho():
    """Two-site Fock density of (|01> + |10>)/sqrt(2)."""
    a1, a2 = fock_annihilators(2)
    psi = (a1.T + a2.T) @ np.eye(4)[0] / np.sqrt(2)
    return np.outer(psi, psi.conj())


def state01_rho():
    """Two-site Fock density with only dot 2 occupied."""
    _, a2 = fock_annihilators(2)
    psi = a2.T @ np.eye(4)[0]
    return np.outer(psi, psi.conj())


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance():
    def record(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
