import pytest

from schwinger_qlm import (
    CircuitEngine,
    ZeroMomentumBasis,
    eigendecompose,
    eigenstate_diagnostics,
    enumerate_physical_basis,
    zero_momentum_hamiltonian,
)


@pytest.fixture(scope="session")
def basis40():
    return enumerate_physical_basis(40)


@pytest.fixture(scope="session")
def sector40(basis40):
    return ZeroMomentumBasis(basis40)


@pytest.fixture(scope="session")
def hamiltonian40(sector40):
    return zero_momentum_hamiltonian(sector40)


@pytest.fixture(scope="session")
def spectral40(hamiltonian40):
    return eigendecompose(hamiltonian40)


@pytest.fixture(scope="session")
def diagnostics40(spectral40, sector40):
    return eigenstate_diagnostics(spectral40, sector40)


@pytest.fixture(scope="session")
def engine40(basis40):
    return CircuitEngine(basis40)


@pytest.fixture(scope="session")
def basis12():
    return enumerate_physical_basis(12)


@pytest.fixture(scope="session")
def sector12(basis12):
    return ZeroMomentumBasis(basis12)


@pytest.fixture(scope="session")
def basis8():
    return enumerate_physical_basis(8)


@pytest.fixture(scope="session")
def sector8(basis8):
    return ZeroMomentumBasis(basis8)
