import pytest

from loopnet import fixtures
from loopnet.connection import WeylBackend
from loopnet.weyl import free_field_connection


@pytest.fixture(scope="session")
def diamond():
    return fixtures.diamond()


@pytest.fixture(scope="session")
def towers():
    return fixtures.two_towers()


@pytest.fixture(scope="session")
def mink():
    return fixtures.minkowski_with_rotations()


@pytest.fixture(scope="session")
def field(mink):
    """(f0, profile, field connection) for the rotation-invariant 0-cochain."""
    _, act = mink
    return free_field_connection(act)


@pytest.fixture(scope="session")
def weyl(field):
    return WeylBackend(field[2])


# criterion number -> (title, passed, detail); filled by test_acceptance
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}: {detail}")
