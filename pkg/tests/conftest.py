import os

import pytest
from hypothesis import HealthCheck, settings

from semidyn import config
from semidyn.dynamics import GridSpec, Semigroup, WordBudget
from semidyn.expr import parse
from semidyn.words import Alphabet, GeneratedBy

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=500, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def free2():
    return Alphabet(("f", "g"))


@pytest.fixture
def even_pairs(free2):
    return GeneratedBy(tuple(free2.parse(w) for w in ("f.f", "g.g", "f.g", "g.f")))


@pytest.fixture
def sincos(free2):
    return Semigroup(free2, (parse("sin(z)"), parse("cos(z)")))


@pytest.fixture
def cyclic_exp():
    return Semigroup(Alphabet(("f",), abelian=True), (parse("exp(z)"),))


@pytest.fixture
def small_grid():
    return GridSpec(0j, 8.0, 8.0, 48, 48)


@pytest.fixture
def budget2():
    return WordBudget(2)


@pytest.fixture(scope="session")
def bundled():
    return {name: config.load("@" + name) for name in config.bundled_names()}
