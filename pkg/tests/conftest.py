import pytest

import util


@pytest.fixture
def hawkes():
    return util.hawkes_spec()


@pytest.fixture
def carma21():
    return util.carma21_spec()


@pytest.fixture
def carma31():
    return util.carma31_spec()


@pytest.fixture
def biv_independent():
    return util.biv_independent()


@pytest.fixture
def biv_cross():
    return util.biv_cross()


@pytest.fixture
def biv_lagged():
    return util.biv_lagged()
