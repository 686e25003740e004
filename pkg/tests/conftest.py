import pytest
from fixtures import BLOOD_ADDRESSES, FPSYG_AFFILIATIONS, FPSYG_AUTHORS, INORG_ADDRESSES

from citegravity.geodesy import default_gazetteer
from citegravity.ingest import CitedRecord, CitingRecord


@pytest.fixture(scope="session")
def gaz():
    return default_gazetteer()


@pytest.fixture
def fpsyg():
    return CitedRecord("10.3389/fpsyg.2011.00227", 2011, FPSYG_AUTHORS, FPSYG_AFFILIATIONS)


@pytest.fixture
def blood():
    return CitingRecord("10.1182/blood-2010-01-261289", 2010, BLOOD_ADDRESSES, ("c1",))


@pytest.fixture
def inorg():
    return CitingRecord("10.1021/acs.inorgchem.8b02267", 2018, INORG_ADDRESSES, ("c1",))


# acceptance outcomes, filled in by test_acceptance and printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
