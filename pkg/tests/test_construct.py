from fractions import Fraction

import pytest
import sympy as sp
from mpmath import mp
from hypothesis import given, settings

import oracles
from conftest import LAM, PI, cantor_point, ex47_point, lam, load, ms, q, ratios
from gdfractal.construct import (
    BadDelta,
    GdIfs,
    InvalidPoint,
    MagnitudeSumMismatch,
    NonRationalMatrix,
    NonRationalRatios,
    NotContractive,
    ParamPoint,
    build_equal_gap_family,
    build_gdifs,
    build_gdifs_numeric,
    build_matrix,
    check_contractive,
    equal_gap_delta,
    solve_lengths,
    validate_point,
    verify_separation,
)
from gdfractal.digraph import Digraph
from gdfractal.exactnum import Monomial, MonomialSum, QMatrix, SignedMonomial, prime_generator
from gdfractal.gaps import level_approx
from strategies import points

ONE_VERTEX = Digraph(["1"], [("1", "1"), ("1", "1")])
T2_GRAPH = Digraph(["1", "2"], [("1", "2"), ("1", "2"), ("2", "2"), ("2", "1")])


def qm(rows):
    return QMatrix.from_rows([[q(x) for x in r] for r in rows], len(rows[0]))


def as_q(matrix):
    return [[x.rational_value() for x in row] for row in matrix.entries]


# ---------------------------------------------------------------------------
# ratio matrix and contractivity

def test_matrix_example47():
    assert as_q(build_matrix(ex47_point())) == [[q("1/2"), q("1/3")], [q("1/5"), q("1/7")]]


def test_matrix_example43():
    m = as_q(build_matrix(load("example43.json").point()))
    assert m == [[q("1/2"), q("1/3"), 0], [q("1/5"), q("1/7"), 0], [q("1/5"), 0, q("1/3") + q("1/7")]]


def test_matrix_cantor_and_general_s():
    assert as_q(build_matrix(cantor_point())) == [[q("2/3")]]
    m = build_matrix(cantor_point(), s=Fraction(1, 2))
    assert str(m) == "[[2*3^(-1/2)]]"
    with pytest.raises(NonRationalMatrix):
        m.as_qmatrix()
    with pytest.raises(ValueError):
        build_matrix(cantor_point(), s=0)


def test_contractive_row_sum():
    c = check_contractive(qm([["1/2", "1/3"], ["1/5", "1/7"]]))
    assert c and c.proof == "row-sum" and max(c.values) == q("5/6")


def test_not_contractive_identity():
    assert not check_contractive(qm([[1]]))


def test_contractive_by_minors():
    c = check_contractive(qm([["1/2", 1], [0, "1/2"]]))
    assert c and c.proof == "principal-minors" and c.values == (q("1/2"), q("1/4"))
    # oracle: eigenvalues of the upper-triangular matrix
    assert sp.Matrix([[sp.Rational(1, 2), 1], [0, sp.Rational(1, 2)]]).eigenvals() == {sp.Rational(1, 2): 2}


def test_contractive_rejects_negative_entries():
    with pytest.raises(ValueError):
        check_contractive(qm([["-1/2"]]))


@given(points(signed=False))
def test_contractivity_matches_spectral_radius(p):
    m = build_matrix(p).as_qmatrix()
    rho = max(abs(complex(z)) for z in sp.Matrix([[sp.Rational(x.numerator, x.denominator) for x in r] for r in m.rows]).eigenvals())
    assert bool(check_contractive(m)) == (rho < 1 - 1e-12)


def test_minors_decide_when_row_sums_fail():
    assert not check_contractive(qm([["1/2", "3/4"], ["3/4", "1/2"]]))
    assert check_contractive(qm([["1/2", "3/4"], ["1/4", "1/4"]]))


# ---------------------------------------------------------------------------
# lengths

def test_lengths_example47():
    lengths = solve_lengths(ex47_point())
    assert lengths == {"1": lam(q("25/2")), "2": lam(q("63/4"))}
    # oracle: sympy solve of the 2x2 system, then substitution into the length identity
    oracle = oracles.solve_lengths([[q("1/2"), q("1/3")], [q("1/5"), q("1/7")]], [1, 11])
    assert oracle == [sp.Rational(25, 2), sp.Rational(63, 4)]
    assert 1 + sp.Rational(1, 2) * oracle[0] + sp.Rational(1, 3) * oracle[1] == oracle[0]


def test_lengths_cantor():
    assert solve_lengths(cantor_point()) == {"1": ms(1)}


def test_lengths_example43_mixed_generators():
    lengths = solve_lengths(load("example43.json").point())
    lam_pi = MonomialSum.from_monomial(Monomial.of(LAM) * Monomial.of(PI), q("21/11"))
    assert lengths["3"] == lam_pi + lam(q("105/22"))


def test_lengths_rejects_irrational_ratios_and_noncontractive():
    half = SignedMonomial(1, Monomial.of(prime_generator(2)) ** q("-1/2"))
    with pytest.raises(NonRationalRatios):
        solve_lengths(ParamPoint(ONE_VERTEX, (half, half), {"1": (ms(1),)}))
    with pytest.raises(NotContractive):
        solve_lengths(ParamPoint(ONE_VERTEX, ratios("1/2", "1/2"), {"1": (ms(1),)}))


def length_identity(f, v):
    acc = MonomialSum.ZERO
    for x in f.gaps[v]:
        acc = acc + x
    for e in f.graph.out_lists[v]:
        acc = acc + f.lengths[f.graph.edges[e].dst] * MonomialSum.from_monomial(f.ratios[e].magnitude)
    return acc


def right_endpoint(f, v):
    last = f.graph.out_lists[v][-1]
    return f.anchors[v][-1] + f.lengths[f.graph.edges[last].dst] * f.ratios[last].magnitude


@given(points())
def test_length_and_endpoint_identities(p):
    f = build_gdifs(p)
    for v in p.graph.vertices:
        assert length_identity(f, v) == f.lengths[v]
        assert right_endpoint(f, v) == f.base[v] + f.lengths[v]
        gs = p.gap_sum(v).rational_value()
        assert f.lengths[v].rational_value() >= gs > 0


# ---------------------------------------------------------------------------
# maps

def test_maps_example47():
    f = build_gdifs(ex47_point())
    assert [str(r) for r in f.ratios] == ["1/2", "1/3", "1/5", "1/7"]
    assert f.translations == (ms(0), lam(q("29/4")), ms(0), lam(q("27/2")))
    assert f.hull("1") == (ms(0), lam(q("25/2")))
    assert f.hull("2") == (ms(0), lam(q("63/4")))


def test_maps_against_anchor_oracle():
    lam_ = sp.Symbol("lam", positive=True)
    lengths = {"1": sp.Rational(25, 2) * lam_, "2": sp.Rational(63, 4) * lam_}
    vertex_edges = {"1": [("e11", "1", sp.Rational(1, 2)), ("e12", "2", sp.Rational(1, 3))],
                    "2": [("e21", "1", sp.Rational(1, 5)), ("e22", "2", sp.Rational(1, 7))]}
    maps = oracles.affine_maps(vertex_edges, lengths, {"1": [lam_], "2": [11 * lam_]}, {"1": 0, "2": 0})
    assert maps["e12"] == (sp.Rational(1, 3), sp.Rational(29, 4) * lam_)
    assert maps["e22"] == (sp.Rational(1, 7), sp.Rational(27, 2) * lam_)


def test_maps_cantor(cantor_direct):
    assert [cantor_direct.describe_map(e) for e in range(2)] == ["t -> 1/3*t + 0", "t -> 1/3*t + 2/3"]


def test_negative_ratio_branch():
    p = ParamPoint(ONE_VERTEX, ratios("-1/3", "1/3"), {"1": (ms("1/3"),)})
    f = build_gdifs(p)
    assert (f.ratios[0].sign, f.translations[0]) == (-1, ms("1/3"))
    assert f.apply(0, ms(0)) == ms("1/3") and f.apply(0, ms(1)) == ms(0)
    assert f.child_intervals("1") == [(ms(0), ms("1/3")), (ms("2/3"), ms(1))]
    assert oracles.affine_maps({"1": [("a", "1", sp.Rational(-1, 3)), ("b", "1", sp.Rational(1, 3))]},
                               {"1": 1}, {"1": [sp.Rational(1, 3)]}, {"1": 0}) == {
        "a": (sp.Rational(-1, 3), sp.Rational(1, 3)), "b": (sp.Rational(1, 3), sp.Rational(2, 3))}


def test_base_points_shift_hulls():
    p = ParamPoint(ONE_VERTEX, ratios("1/3", "1/3"), {"1": (ms("1/3"),)}, {"1": ms(5)})
    f = build_gdifs(p)
    assert f.hull("1") == (ms(5), ms(6))
    assert f.child_intervals("1") == [(ms(5), ms(q("16/3"))), (ms(q("17/3")), ms(6))]


@given(points())
def test_child_images_land_on_anchors(p):
    f = build_gdifs(p)
    g = p.graph
    for v in g.vertices:
        for k, e in enumerate(g.out_lists[v]):
            lo, hi = f.child_intervals(v)[k]
            assert lo == f.anchors[v][k]
            assert hi - lo == f.lengths[g.edges[e].dst] * p.ratios[e].magnitude


@settings(max_examples=25)
@given(points(max_v=2, max_d=2))
def test_endpoint_stability(p):
    f = build_gdifs(p)
    for v in p.graph.vertices:
        lo, hi = f.hull(v)
        for m in range(1, 7):
            level = level_approx(f, v, m)
            assert min(a.rational_value() for a, _ in level) == lo.rational_value()
            assert max(b.rational_value() for _, b in level) == hi.rational_value()


@given(points())
def test_children_inside_parent_hull(p):
    f = build_gdifs(p)
    for v in p.graph.vertices:
        lo, hi = (x.rational_value() for x in f.hull(v))
        for a, b in f.child_intervals(v):
            assert lo <= a.rational_value() <= b.rational_value() <= hi


@given(points())
def test_random_points_are_separated(p):
    rep = verify_separation(build_gdifs(p))
    zero = any(x.is_zero() for xs in p.gaps.values() for x in xs)
    assert rep.status == ("COSC-only" if zero else "CSSC")
    assert not rep.overlaps and not rep.order_violations
    for v in p.graph.vertices:
        assert [gp.length for gp in rep.gaps[v]] == list(p.gaps[v])


# ---------------------------------------------------------------------------
# validation

def test_validate_point_messages():
    assert validate_point(ex47_point()) == []
    bad = ParamPoint(ONE_VERTEX, ratios("3/2", "1/3"), {"1": (ms(0),)})
    problems = validate_point(bad)
    assert any("not < 1" in s for s in problems) and any("no positive gap" in s for s in problems)
    assert "one ratio per edge" in validate_point(ParamPoint(ONE_VERTEX, ratios("1/3"), {"1": ()}))[0]
    wrong = ParamPoint(ONE_VERTEX, ratios("1/3", "1/3"), {"1": (ms(1), ms(1))})
    assert "needs 1 gap lengths" in validate_point(wrong)[0]
    with pytest.raises(InvalidPoint):
        build_gdifs(bad)


def test_gap_must_be_monomial():
    p = ParamPoint(ONE_VERTEX, ratios("1/3", "1/3"), {"1": (lam() + ms(1),)})
    assert any("monomial" in s for s in validate_point(p))


def test_one_out_edge_rejected():
    g = Digraph(["1", "2"], [("1", "2"), ("1", "2"), ("2", "1")])
    p = ParamPoint(g, ratios("1/3", "1/3", "1/2"), {"1": (ms(1),), "2": ()})
    assert any("d_u >= 2" in s for s in validate_point(p))


# ---------------------------------------------------------------------------
# equal-gap family

def test_equal_gap_cantor():
    f = build_equal_gap_family(ONE_VERTEX, q("1/3"), {"1": [q("1/3"), q("1/3")]})
    assert f.translations == (ms(0), ms("2/3")) and equal_gap_delta(f) == q("1/3")


def test_equal_gap_two_vertex():
    f = build_equal_gap_family(T2_GRAPH, q("1/5"), {"1": [q("1/2"), q("3/10")], "2": [q("2/5"), q("2/5")]})
    rep = verify_separation(f)
    assert rep.status == "CSSC"
    for v in "12":
        assert f.hull(v) == (ms(0), ms(1))
        assert [gp.length for gp in rep.gaps[v]] == [ms("1/5")]
    assert f.child_intervals("1") == [(ms(0), ms("1/2")), (ms("7/10"), ms(1))]


def test_equal_gap_errors():
    with pytest.raises(MagnitudeSumMismatch):
        build_equal_gap_family(ONE_VERTEX, q("1/5"), {"1": [q("1/2"), q("1/2")]})
    three = Digraph(["1"], [("1", "1")] * 3)
    with pytest.raises(BadDelta):
        build_equal_gap_family(three, q("1/2"), {"1": [0, 0, 0]})
    with pytest.raises(BadDelta):
        build_equal_gap_family(ONE_VERTEX, 0, {"1": [q("1/2"), q("1/2")]})


def test_equal_gap_signed_maps():
    f = build_equal_gap_family(ONE_VERTEX, q("1/3"), {"1": [q("1/3"), q("1/3")]}, {"1": [-1, 1]})
    assert f.translations[0] == ms("1/3") and verify_separation(f).status == "CSSC"


@given(points(max_v=2, max_d=3))
def test_equal_gap_family_postconditions(p):
    g = p.graph
    delta = Fraction(1, 2 * max(g.degree(v) for v in g.vertices))
    mags = {}
    for v in g.vertices:
        d = g.degree(v)
        mags[v] = [(1 - (d - 1) * delta) / d] * d
    f = build_equal_gap_family(g, delta, mags)
    rep = verify_separation(f)
    assert rep.status == "CSSC" and equal_gap_delta(f) == delta
    for v in g.vertices:
        assert f.hull(v) == (ms(0), ms(1))
        assert all(gp.length == MonomialSum.from_fraction(delta) for gp in rep.gaps[v])
        assert sum(r.magnitude.rational_value() for r in (f.ratios[e] for e in g.out_lists[v])) + (g.degree(v) - 1) * delta == 1


def test_equal_gap_delta_rejects_other_shapes(ex47, t2):
    assert equal_gap_delta(ex47) is None
    assert equal_gap_delta(t2) == q("1/5")


# ---------------------------------------------------------------------------
# separation

def test_separation_example47(ex47):
    rep = verify_separation(ex47)
    assert rep.status == "CSSC"
    assert [str(m) for m in rep.lambda_set("1")] == ["lam"]
    assert [str(m) for m in rep.lambda_set("2")] == ["11*lam"]


def test_separation_example43(ex43):
    rep = verify_separation(ex43)
    assert rep.status == "COSC-only"
    assert [gp.length for gp in rep.gaps["3"]] == [ms(0), MonomialSum.from_monomial(Monomial.of(PI) * Monomial.of(LAM))]
    assert [str(m) for m in rep.lambda_set("3")] == ["lam*pi"]
    assert [str(m) for m in rep.lambda_set("1")] == ["lam"]


def test_separation_overlap():
    f = GdIfs.from_maps(ONE_VERTEX, [q("1/2"), q("1/2")], [0, q("1/4")], {"1": (0, 1)})
    rep = verify_separation(f)
    assert rep.status == "fails-COSC"
    assert rep.overlaps[0]["right"] == (ms("1/4"), ms("3/4"))


def test_separation_outside_hull():
    f = GdIfs.from_maps(ONE_VERTEX, [q("1/2"), q("1/2")], [q("-1/4"), q("1/2")], {"1": (0, 1)})
    assert verify_separation(f).overlaps[0]["kind"] == "outside-hull"


def test_order_violation_is_reported():
    f = GdIfs.from_maps(ONE_VERTEX, [q("1/3"), q("1/3")], [q("2/3"), 0], {"1": (0, 1)})
    rep = verify_separation(f)
    assert rep.order_violations == [{"vertex": "1", "index": 1}] and not rep.overlaps


# ---------------------------------------------------------------------------
# numeric mode

def root_half():
    return SignedMonomial(1, Monomial.of(prime_generator(2)) ** q("-1/2"))


def test_numeric_mode_irrational_ratios():
    r = SignedMonomial(1, Monomial.of(prime_generator(2)) ** q("-2"))  # 1/4
    s = SignedMonomial(1, Monomial.of(prime_generator(3)) ** q("-1/2"))
    p = ParamPoint(ONE_VERTEX, (r, s), {"1": (ms("1/5"),)})
    f = build_gdifs_numeric(p)
    with mp.workprec(400):
        want = mp.mpf(1) / 5 / (1 - mp.mpf(1) / 4 - 1 / mp.sqrt(3))
        assert mp.mpf(f.lengths["1"].lo.numerator) / f.lengths["1"].lo.denominator <= want
        assert want <= mp.mpf(f.lengths["1"].hi.numerator) / f.lengths["1"].hi.denominator
    assert f.lengths["1"].width < Fraction(1, 10**30)
    assert verify_separation(f).status == "CSSC"


def test_numeric_agrees_with_exact_on_rational_points(ex47):
    p = ex47_point(gap1=ms(1))
    f = build_gdifs_numeric(p)
    assert f.lengths["1"].contains(q("25/2")) and f.lengths["2"].contains(q("63/4"))
    assert f.translations[1].contains(q("29/4"))
    assert verify_separation(f).status == "CSSC"


def test_numeric_touching_gap():
    p = ParamPoint(ONE_VERTEX, (root_half(), SignedMonomial.from_fraction(q("1/4"))), {"1": (ms(0),)})
    with pytest.raises(InvalidPoint):
        build_gdifs_numeric(p)
    g3 = Digraph(["1"], [("1", "1")] * 3)
    p = ParamPoint(g3, (root_half(), SignedMonomial.from_fraction(q("1/8")), SignedMonomial.from_fraction(q("1/8"))),
                   {"1": (ms(0), ms(1))})
    assert verify_separation(build_gdifs_numeric(p)).status == "COSC-only"


def test_numeric_rejects_large_irrational_ratio():
    big = SignedMonomial(1, Monomial.of(prime_generator(2)) ** q("1/2"))
    with pytest.raises(InvalidPoint):
        build_gdifs_numeric(ParamPoint(ONE_VERTEX, (big, big), {"1": (ms(1),)}))
