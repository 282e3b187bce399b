from fractions import Fraction
from importlib import resources

import pytest
from hypothesis import settings

from gdfractal.construct import ParamPoint, build_gdifs
from gdfractal.digraph import Digraph
from gdfractal.exactnum import Monomial, MonomialSum, SignedMonomial, abstract_generator
from gdfractal.spec_io import parse_spec

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

FIXTURES = resources.files("gdfractal") / "fixtures"
LAM = abstract_generator("lam", "1.0")
PI = abstract_generator("pi", "3.14159265358979")


def load(name):
    return parse_spec((FIXTURES / name).read_bytes())


def q(x):
    return Fraction(x)


def ms(x):
    return MonomialSum.coerce(Fraction(x))


def lam(c=1, *extra):
    m = Monomial.of(LAM)
    for g in extra:
        m = m * Monomial.of(g)
    return MonomialSum.from_monomial(m, c)


def ratios(*qs):
    return tuple(SignedMonomial.from_fraction(Fraction(x)) for x in qs)


def ex47_point(gap1=None, gap2=None):
    g = Digraph(["1", "2"], [("1", "1"), ("1", "2"), ("2", "1"), ("2", "2")])
    gap1 = lam() if gap1 is None else gap1
    gap2 = gap1 * 11 if gap2 is None else gap2
    return ParamPoint(g, ratios("1/2", "1/3", "1/5", "1/7"), {"1": (gap1,), "2": (gap2,)})


def cantor_point():
    g = Digraph(["1"], [("1", "1"), ("1", "1")])
    return ParamPoint(g, ratios("1/3", "1/3"), {"1": (ms("1/3"),)})


@pytest.fixture(scope="session")
def ex47():
    return load("example47.json").build()


@pytest.fixture(scope="session")
def ex43():
    return load("example43.json").build()


@pytest.fixture(scope="session")
def fig2():
    return load("fig2.json").build()


@pytest.fixture(scope="session")
def cantor():
    return load("cantor.json").build()


@pytest.fixture(scope="session")
def t2():
    return load("t2_equalgap.json").build()


@pytest.fixture(scope="session")
def cantor_direct():
    return build_gdifs(cantor_point())
