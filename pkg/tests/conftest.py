"""Shared contexts for the test suite."""
import pytest

from src.field import make_field
from src.group import build_action
from src.saxl import suborbit_census


@pytest.fixture(scope="session")
def field7():
    """F_49 with its subfield F_7."""
    return make_field(7, 1)


@pytest.fixture(scope="session")
def action7(field7):
    """The enumerated orbit of w0 at q = 7 (anti-diagonal model)."""
    return build_action(field7)


@pytest.fixture(scope="session")
def census7(action7):
    """The suborbit census of w0 at q = 7."""
    return suborbit_census(action7)


@pytest.fixture(scope="session")
def census9():
    """The census at q = 9, built only for the slow suites."""
    return suborbit_census(build_action(make_field(3, 2)))


@pytest.fixture(scope="session")
def census11():
    """The census at q = 11, where d = 3, built only for the slow suites."""
    return suborbit_census(build_action(make_field(11, 1)))


@pytest.fixture(scope="session")
def census13():
    """The census at q = 13, built only for the slow suites."""
    return suborbit_census(build_action(make_field(13, 1)))
