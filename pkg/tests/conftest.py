"""Shared test helpers and the acceptance-criteria summary hook."""
import numpy as np
import pytest

_ACCEPTANCE_LINES = []


def acceptance_line(line: str) -> None:
    """Record one acceptance-criterion outcome for the end-of-run summary."""
    print(line)
    _ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_density_matrix(rng, dim=4, rank=None):
    """Haar-ish random mixed state via a Ginibre factor."""
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture(scope="session")
def verify_results():
    """The full oracle suite, run once per session (shared with acceptance)."""
    from heomsteady.oracle import verify_all

    return verify_all()
