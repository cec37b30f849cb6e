from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from treescale import CoupledWreath, Full, Universal, cyclic_group, standard_translation

settings.register_profile(
	"default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def full3():
	return Full(3)


@pytest.fixture(scope="session")
def full4():
	return Full(4)


@pytest.fixture(scope="session")
def cw2():
	return CoupledWreath(2)


@pytest.fixture(scope="session")
def uc3():
	return Universal(cyclic_group(3))


@pytest.fixture(scope="session")
def schemes(full3, cw2, uc3):
	return {"Full(3)": full3, "CW(2)": cw2, "U(C3)": uc3}


@pytest.fixture
def rng():
	return random.Random(20261016)


@pytest.fixture(scope="session")
def std3(full3):
	return standard_translation(full3)
