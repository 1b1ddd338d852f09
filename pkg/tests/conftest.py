import pytest

from gcms import matrices


@pytest.fixture(scope="session")
def renewal():
    return matrices.renewal()


@pytest.fixture(scope="session")
def pair():
    return matrices.pair_renewal()


@pytest.fixture(scope="session")
def prime():
    return matrices.prime_renewal()


@pytest.fixture(scope="session")
def alternating():
    return matrices.alternating_renewal()
