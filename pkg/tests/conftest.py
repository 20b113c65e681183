import pytest

from sudler import build_table
from sudler.calibration import load_fixtures

# The four quadratic irrationals used throughout the identity tests.
TEST_SPECS = ("golden", "[0;(2)]", "[0;(5)]", "[0;2,(1,4)]")


@pytest.fixture(scope="session")
def tables():
    return {spec: build_table(spec, 8) for spec in TEST_SPECS}


@pytest.fixture(scope="session")
def fixtures():
    return load_fixtures()
