import pytest

from reggeflow import build_torus


@pytest.fixture(scope="session")
def cubic333():
    return build_torus("cubic", (3, 3, 3))


@pytest.fixture(scope="session")
def skew333():
    return build_torus("skew", (3, 3, 3))
