from __future__ import annotations

import pytest

from sgpoid.formats import fixture_path, load_fun, load_sgd
from sgpoid.transformation import generate_closure


def fixture_ts(name):
    parsed = load_sgd(fixture_path(name))
    assert parsed.ts is not None
    return parsed.ts


def fixture_sgpoid(name):
    return load_sgd(fixture_path(name)).sgpoid


def closure_of(name):
    ts = fixture_ts(name)
    return generate_closure(
        ts.state_sets,
        [(a.label, ts.transformations[a.id]) for a in ts.abstract.arrows],
    )


def labels(sgpoid):
    return {a.label: a.id for a in sgpoid.arrows}


@pytest.fixture(scope="session")
def flipflop():
    return fixture_ts("flipflop.sgd")


@pytest.fixture(scope="session")
def fig2():
    return fixture_sgpoid("fig2.sgd")


@pytest.fixture(scope="session")
def z4():
    return fixture_ts("z4.sgd")


@pytest.fixture(scope="session")
def z2():
    return fixture_ts("z2.sgd")


@pytest.fixture(scope="session")
def vessels():
    return fixture_ts("vessels.sgd")


@pytest.fixture(scope="session")
def dualmode_closure():
    return closure_of("dualmode.sgd")


@pytest.fixture(scope="session")
def z4_morphism():
    return load_fun(fixture_path("z4phi.fun")).morphism


@pytest.fixture(scope="session")
def nocompress_functor():
    return load_fun(fixture_path("nocompress.fun")).functor
