import itertools
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import lam, ms, q
from gdfractal.construct import build_gdifs, verify_separation
from gdfractal.digraph import paths_from
from gdfractal.exactnum import Monomial, factor_rational
from gdfractal.gaps import (
    DepthTooLarge,
    EmptyInput,
    IntervalSet,
    ThetaAbsent,
    count_paths,
    detect_geometric_ratios,
    gap_lengths_truncated,
    gaps_bruteforce,
    hausdorff_distance,
    hausdorff_exact,
    level_approx,
    provenance_value,
)
from strategies import points


def rat(level):
    return level.rational()


def strs(ms_):
    return sorted(str(m) for m in ms_)


# ---------------------------------------------------------------------------
# level approximations

def test_level_cantor(cantor):
    assert rat(level_approx(cantor, "1", 0)) == [(0, 1)]
    assert rat(level_approx(cantor, "1", 1)) == [(0, q("1/3")), (q("2/3"), 1)]


def test_level_cantor_matches_ternary_construction(cantor):
    for m in range(1, 7):
        want = []
        for digits in itertools.product((0, 2), repeat=m):
            a = sum(Fraction(d, 3 ** (i + 1)) for i, d in enumerate(digits))
            want.append((a, a + Fraction(1, 3 ** m)))
        assert rat(level_approx(cantor, "1", m)) == want


def test_level_example47(ex47):
    level = level_approx(ex47, "1", 1)
    assert list(level) == [(ms(0), lam(q("25/4"))), (lam(q("29/4")), lam(q("25/2")))]
    assert list(level_approx(ex47, "2", 0)) == [(ms(0), lam(q("63/4")))]


def test_level_errors(cantor):
    with pytest.raises(DepthTooLarge):
        level_approx(cantor, "1", 12, budget=1000)
    with pytest.raises(ValueError):
        level_approx(cantor, "1", -1)
    assert count_paths(cantor, "1", 10) == 1024


@settings(max_examples=30)
@given(points(max_v=2, max_d=3))
def test_nesting(p):
    f = build_gdifs(p)
    for u in p.graph.vertices:
        prev = level_approx(f, u, 0)
        for m in range(1, 4):
            cur = level_approx(f, u, m)
            assert prev.contains_set(cur)
            assert cur.total_length().rational_value() <= prev.total_length().rational_value()
            prev = cur


@settings(max_examples=30)
@given(points(max_v=2, max_d=2))
def test_cylinders_disjoint_under_cssc(p):
    p = type(p)(p.graph, p.ratios, {v: tuple(x if not x.is_zero() else ms(1) for x in xs) for v, xs in p.gaps.items()},
                p.base_points)
    f = build_gdifs(p)
    assert verify_separation(f).status == "CSSC"
    for u in p.graph.vertices:
        paths = list(paths_from(p.graph, u, 4))
        imgs = {path: tuple(x.rational_value() for x in f.image(path, u)) for path in paths}
        for a, b in itertools.combinations(paths, 2):
            if a == b[:len(a)] or b == a[:len(b)]:
                continue
            (a0, a1), (b0, b1) = imgs[a], imgs[b]
            assert a1 < b0 or b1 < a0


# ---------------------------------------------------------------------------
# catalogs

def test_catalog_cantor(cantor):
    cat = gap_lengths_truncated(cantor, "1", 2)
    assert Counter(str(m) for m in cat.multiset().elements()) == Counter(
        {"1/3": 1, "1/9": 2, "1/27": 4})
    assert [str(v) for v in cat.values()] == ["1/27", "1/9", "1/3"]


def test_catalog_example47(ex47):
    cat = gap_lengths_truncated(ex47, "1", 1)
    assert strs(cat.values()) == ["1/2*lam", "11/3*lam", "lam"]
    assert [e.depth for e in cat.entries] == [0, 1, 1]


def test_catalog_skips_vertices_without_gaps(ex43):
    cat = gap_lengths_truncated(ex43, "3", 1)
    # vertex 3's first basic gap is 0 and contributes nothing
    assert all(not (e.vertex == "3" and e.gap_index == 1) for e in cat.entries)
    assert strs(gap_lengths_truncated(ex43, "3", 0).values()) == ["lam*pi"]


def test_catalog_floor_bounds_missing_gaps(cantor):
    cat = gap_lengths_truncated(cantor, "1", 3)
    assert cat.floor == q("1/3") * q("1/3") ** 4
    deeper = gap_lengths_truncated(cantor, "1", 6)
    extra = [e for e in deeper.entries if e.depth > 3]
    assert all(e.length.rational_value() <= cat.floor for e in extra)


def test_bruteforce_cantor(cantor):
    cat = gaps_bruteforce(cantor, "1", 2)
    assert [(e.length.rational_value(), tuple(x.rational_value() for x in e.interval)) for e in cat.entries] == [
        (q("1/9"), (q("1/9"), q("2/9"))), (q("1/3"), (q("1/3"), q("2/3"))), (q("1/9"), (q("7/9"), q("8/9")))]
    assert len(gaps_bruteforce(cantor, "1", 0)) == 0


@pytest.mark.parametrize("fixture,vertices", [("cantor", ["1"]), ("ex47", ["1", "2"])])
def test_oracle_equivalence_fixtures(request, fixture, vertices):
    f = request.getfixturevalue(fixture)
    for u in vertices:
        cat = gap_lengths_truncated(f, u, 5)
        for m in range(1, 7):
            assert gaps_bruteforce(f, u, m).multiset() == cat.up_to_depth(m - 1).multiset()


@settings(max_examples=30)
@given(points(max_v=2, max_d=3))
def test_oracle_equivalence_random(p):
    f = build_gdifs(p)
    for u in p.graph.vertices:
        cat = gap_lengths_truncated(f, u, 3)
        for m in range(1, 5):
            if count_paths(f, u, m) > 400:
                break
            assert gaps_bruteforce(f, u, m).multiset() == cat.up_to_depth(m - 1).multiset()


@settings(max_examples=30)
@given(points(max_v=2, max_d=3))
def test_provenance_reproduces_length(p):
    f = build_gdifs(p)
    for u in p.graph.vertices:
        for e in gap_lengths_truncated(f, u, 3).entries:
            assert provenance_value(f, e) == e.length
            assert len(e.path) == e.depth


def test_provenance_example47(ex47):
    cat = gap_lengths_truncated(ex47, "1", 3)
    for e in cat.entries:
        assert provenance_value(ex47, e) == e.length


def test_catalog_errors(cantor):
    with pytest.raises(DepthTooLarge):
        gap_lengths_truncated(cantor, "1", 20, budget=1000)
    with pytest.raises(ValueError):
        gap_lengths_truncated(cantor, "1", -1)


# ---------------------------------------------------------------------------
# Hausdorff distance

def test_hausdorff_examples():
    unit = [(0, 1)]
    assert hausdorff_distance(unit, unit).hi == 0
    d = hausdorff_distance(unit, [(0, q("1/3")), (q("2/3"), 1)])
    assert d.lo == d.hi == q("1/6")
    assert hausdorff_distance(unit, [(2, 3)]).lo == 2
    with pytest.raises(EmptyInput):
        hausdorff_distance([], unit)


def test_hausdorff_irrational_endpoints(ex43):
    a = level_approx(ex43, "3", 1)
    d = hausdorff_distance(a, a)
    assert d.lo == 0 and d.hi < Fraction(1, 10**20)
    b = IntervalSet(((ms(0), lam(1)),))
    e = hausdorff_distance(b, IntervalSet(((ms(0), ms(2)),)))
    assert e.lo <= 1 <= e.hi


interval_sets = st.lists(
    st.tuples(st.integers(0, 40), st.integers(0, 6)).map(lambda t: (Fraction(t[0], 4), Fraction(t[0] + t[1], 4))),
    min_size=1, max_size=4)


@given(interval_sets, interval_sets)
def test_hausdorff_against_sampling(a, b):
    d = hausdorff_exact(a, b)
    sampled = oracles.hausdorff_sampled([tuple(map(float, x)) for x in a], [tuple(map(float, x)) for x in b], n=4001)
    # the sampling grid has step <= 12.5/4000
    assert abs(float(d) - sampled) <= 0.004
    assert hausdorff_exact(b, a) == d


# ---------------------------------------------------------------------------
# geometric ratio oracle

def mono(x):
    return factor_rational(q(x))


def test_detect_cantor(cantor):
    cat = gap_lengths_truncated(cantor, "1", 5)
    assert mono("1/3") in detect_geometric_ratios(cat, mono("1/9"))


def test_detect_example47(ex47):
    cat = gap_lengths_truncated(ex47, "1", 8)
    theta = lam(q("11/3")).as_monomial()
    assert mono("1/7") in detect_geometric_ratios(cat, theta)
    assert mono("1/2") in detect_geometric_ratios(cat, lam().as_monomial())


def test_detect_requires_theta(cantor):
    cat = gap_lengths_truncated(cantor, "1", 3)
    with pytest.raises(ThetaAbsent):
        detect_geometric_ratios(cat, mono("1/5"))
    with pytest.raises(ValueError):
        detect_geometric_ratios(cat, mono("1/3"), k_min=1)


def test_detect_ratios_are_exact_quotients(ex47):
    cat = gap_lengths_truncated(ex47, "1", 6)
    vals = set(cat.values())
    theta = lam().as_monomial()
    for r in detect_geometric_ratios(cat, theta):
        assert r.rational_value() < 1
        # some progression through theta with ratio r has >= 3 terms in the catalog
        t = theta
        while t / r in vals:
            t = t / r
        n = 0
        while t in vals:
            n, t = n + 1, t * r
        assert n >= 3


def test_detect_ignores_progressions_cut_above_floor():
    from gdfractal.gaps import GapCatalog, GapEntry
    entries = [GapEntry(mono(x), 0) for x in ("1", "1/2", "1/4")]
    assert detect_geometric_ratios(GapCatalog(entries, floor=q("1/100")), Monomial.ONE) == []
    assert detect_geometric_ratios(GapCatalog(entries, floor=q("1/8")), Monomial.ONE) == [mono("1/2")]
