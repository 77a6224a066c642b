import pytest

from artifact import seed_data as sd
from artifact.scattering import chamber_point


@pytest.fixture(scope="session")
def a2():
    return sd.a2_seed()


@pytest.fixture(scope="session")
def kron():
    return sd.kronecker_seed()


@pytest.fixture(scope="session")
def a2_d6(a2):
    return sd.seed_diagram(a2, 6)


@pytest.fixture(scope="session")
def kron_d6(kron):
    return sd.seed_diagram(kron, 6)


@pytest.fixture(scope="session")
def kron_d10(kron):
    return sd.seed_diagram(kron, 10)


@pytest.fixture(scope="session")
def a2_d10(a2):
    return sd.seed_diagram(a2, 10)


@pytest.fixture(scope="session")
def kron_plus(kron_d10):
    return chamber_point(kron_d10, 1)


@pytest.fixture(scope="session")
def a2_plus(a2_d10):
    return chamber_point(a2_d10, 1)
