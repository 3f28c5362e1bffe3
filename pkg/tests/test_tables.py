from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from mdlpoly.facet_tables.expr import ParseError, PoleError, parse, parse_rational_function, to_text
from mdlpoly.facet_tables.tables import (ChecksumError, DomainError, column_entry,
                                         completeness_check, evaluate_table, load_table,
                                         parse_table, table_vertices, verify_table)
from mdlpoly.inequalities import inequality_key
from mdlpoly.polytope import facet_enumeration, mdl_vertices
from mdlpoly.scenario import MdlParams

F = Fraction


@pytest.fixture(scope="module")
def tables():
    return {t: load_table(t) for t in ("B1", "B2", "C")}


def test_parse_example():
    f = parse_rational_function("(l*(9*l-7)+2)/(9*(l-1)*l+2)")
    assert f(l=F(1, 10)) == F(139, 119)
    for l in (F(3, 7), F(-5, 11), F(2, 9)):
        assert f(l=l) == (l * (9 * l - 7) + 2) / (9 * (l - 1) * l + 2)
    assert parse_rational_function("1")() == 1
    with pytest.raises(PoleError):
        parse_rational_function("1/(h-1)")(h=F(1))
    assert parse_rational_function("(h-1)^-2")(h=F(1, 2)) == 4
    with pytest.raises(PoleError):
        parse_rational_function("(h-1)^-1")(h=F(1))


@pytest.mark.parametrize("text,pos", [("1+", 2), ("(l", 2), ("l $ h", 2), ("2.5", 1), ("l h", 2)])
def test_parse_errors(text, pos):
    with pytest.raises(ParseError) as e:
        parse(text)
    assert e.value.position == pos


def test_every_cell_roundtrips(tables):
    for t in tables.values():
        for row in t.rows:
            for cell in row:
                tree = cell.tree
                assert parse(to_text(tree)) == tree
                assert cell.symbols <= {"l", "h", "hx", "hy"}


exprs = st.recursive(
    st.one_of(st.integers(0, 20).map(str), st.sampled_from(["l", "h", "hx", "hy"])),
    lambda c: st.one_of(st.tuples(c, st.sampled_from("+-*/"), c).map(lambda t: f"({t[0]}{t[1]}{t[2]})"),
                        c.map(lambda s: f"-{s}"), c.map(lambda s: f"({s})^2")),
    max_leaves=12)


@given(exprs)
def test_random_expression_roundtrip(text):
    tree = parse(text)
    assert parse(to_text(tree)) == tree
    env = {"l": F(1, 7), "h": F(3, 11), "hx": F(5, 13), "hy": F(-2, 3)}
    try:
        v = parse_rational_function(text)(**env)
    except PoleError:
        return
    assert v == parse_rational_function(to_text(tree))(**env)


def test_table_sizes(tables):
    assert len(tables["B1"]) == 74
    assert len(tables["B2"]) == 92  # numbering runs to 93, row 45 is absent in the source
    assert 45 not in tables["B2"].labels and tables["B2"].labels[-1] == 93
    assert len(tables["C"]) == 75


def test_checksum_detects_edits():
    from importlib import resources
    text = resources.files("mdlpoly.facet_tables").joinpath("data", "B1.txt").read_text()
    lines = text.splitlines()
    k = next(i for i, s in enumerate(lines) if s and not s.startswith("#"))
    lines[k] = lines[k].replace(";", "+0;", 1)
    with pytest.raises(ChecksumError):
        parse_table("\n".join(lines))


def test_column_order():
    assert column_entry(0) == ((0, 0), (0, 0))
    assert column_entry(1) == ((1, 0), (0, 0))
    assert column_entry(2) == ((0, 1), (0, 0))
    assert column_entry(4) == ((0, 0), (1, 0))
    assert column_entry(15) == ((1, 1), (1, 1))


def test_evaluate_table(tables):
    assert len(evaluate_table(tables["B1"], {"l": F(1, 10)})) == 74
    assert len(evaluate_table(tables["B2"], {"h": F(3, 10)})) == 92
    assert all(i.bound == 0 for i in evaluate_table(tables["B1"], {"l": F(1, 10)}))
    with pytest.raises(DomainError):
        evaluate_table(tables["B1"], {"l": F(1, 3)})
    with pytest.raises(DomainError):
        evaluate_table(tables["B2"], {"h": F(1, 5)})
    with pytest.raises(DomainError):
        evaluate_table(tables["C"], {"hx": F(1, 2), "hy": F(3, 5)})


def test_verify_b1(tables, mdl_1_10):
    rep = verify_table(tables["B1"], {"l": F(1, 10)}, mdl_1_10)
    assert rep.summary["valid"] == 74 and rep.summary["facets"] == 74
    flipped = [r.label for r in rep.rows if r.report.orientation_flipped]
    assert flipped == [74]
    row74 = rep.rows[-1]
    assert [b for b in row74.inequality.beta if b] == [-1]


@settings(max_examples=6)
@given(st.integers(1, 249))
def test_b1_rows_valid_inside_domain(k):
    t = load_table("B1")
    l = F(k, 1000)
    rep = verify_table(t, {"l": l}, table_vertices(t, {"l": l}))
    assert rep.summary["valid"] == 74 and rep.summary["facets"] == 74


@settings(max_examples=6)
@given(st.integers(251, 332))
def test_b2_rows_valid_inside_domain(k):
    t = load_table("B2")
    h = F(k, 1000)
    rep = verify_table(t, {"h": h}, table_vertices(t, {"h": h}))
    assert rep.summary["valid"] == 92 and rep.summary["facets"] == 92


@pytest.mark.parametrize("tid,key,limit,inside", [("B1", "l", F(1, 4), F(249, 1000)),
                                                  ("B2", "h", F(1, 4), F(251, 1000))])
def test_limit_is_scaled_local_polytope(sc222, tables, tid, key, limit, inside):
    t = tables[tid]
    near = verify_table(t, {key: inside}, table_vertices(t, {key: inside}))
    assert near.summary["facets"] == len(t)
    verts = mdl_vertices(sc222, MdlParams(F(1, 4), F(1, 4)))
    at = verify_table(t, {key: limit}, verts, allow_boundary=True)
    assert at.summary["valid"] == len(t) and at.summary["polytope_dimension"] == 8
    hrep = facet_enumeration(verts)
    facets = {inequality_key(a, b, hrep.eqs) for a, b in hrep.ineqs}
    for r in at.rows:
        if r.report.is_facet:
            assert inequality_key(r.inequality.beta, r.inequality.bound, hrep.eqs) in facets


def test_table_c_measurement_independence_limit(tables):
    t = tables["C"]
    p = {"hx": F(1, 2), "hy": F(1, 2)}
    rep = verify_table(t, p, table_vertices(t, p), allow_boundary=True)
    assert rep.summary["polytope_dimension"] == 8
    assert rep.summary["poles"] == 10 and rep.summary["failed"] == 0
    assert rep.summary["valid"] == 65


def test_table_c_regression_counts(tables):
    """Frozen behaviour of the C rows; row 1 is invalid at every point tried."""
    t = tables["C"]
    for p, valid in (({"hx": F(3, 5), "hy": F(4, 5)}, 74), ({"hx": F(7, 10), "hy": F(7, 10)}, 72)):
        rep = verify_table(t, p, table_vertices(t, p))
        assert rep.summary["valid"] == valid
        assert [r.label for r in rep.rows if r.report and not r.report.valid] == [1]


@pytest.fixture(scope="module")
def b1_facets(mdl_1_10):
    return facet_enumeration(mdl_1_10)


def test_completeness_negative_control(tables, mdl_1_10, b1_facets):
    t = tables["B1"]
    truncated = type(t)(t.id, t.domain, t.parameters, t.rows[:-5], t.labels[:-5])
    rep = completeness_check(truncated, {"l": F(1, 10)}, mdl_1_10, hrep=b1_facets)
    assert not rep.complete and len(rep.missing) > 0


def test_completeness_literal_group_gap(tables, mdl_1_10, b1_facets):
    rep = completeness_check(tables["B1"], {"l": F(1, 10)}, mdl_1_10,
                             conditional_output_flips=False, hrep=b1_facets)
    assert rep.facet_count == 7268
    assert len(rep.missing) == 5212
