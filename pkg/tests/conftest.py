import pytest

from support import DATA_DIR, carrier_catalog, station_catalog


@pytest.fixture(scope="session")
def catalog():
    """Constructors plus the carrier robot objects."""
    return carrier_catalog()


@pytest.fixture(scope="session")
def station():
    return station_catalog()


@pytest.fixture(scope="session")
def data_dir():
    return DATA_DIR
