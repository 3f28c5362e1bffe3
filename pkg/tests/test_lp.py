from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import linprog

from mdlpoly.inequalities import chsh_conditional, golden
from mdlpoly.lp import (Infeasible, InconsistentEqualities, Unbounded, check_inequality,
                        intersect_with_equalities, membership, redundancy_filter, solve_lp,
                        verify_inside, verify_outside)
from mdlpoly.polytope import HRep, local_vertices, mdl_vertices, vertex_enumeration
from mdlpoly.rational import dot
from mdlpoly.scenario import MdlParams

F = Fraction


def test_trivial_lp():
    sol = solve_lp([1], [[1], [-1]], [1, 0])
    assert sol.value == 1 and sol.x == (1,)
    assert sol.duality_gap([1, 0]) == 0


def test_chsh_local_max(sc222):
    verts = local_vertices(sc222).vertices
    chsh = chsh_conditional()
    # max beta.p over the hull, as an LP over convex weights
    A_eq = [[v[j] for v in verts] + [-int(i == j) for i in range(16)] for j in range(16)]
    A_eq.append([1] * len(verts) + [0] * 16)
    c = [0] * len(verts) + list(chsh.beta)
    sol = solve_lp(c, A_eq=A_eq, b_eq=[0] * 16 + [1])
    assert sol.value == 2


def test_degenerate_tie_deterministic():
    # every vertex of the simplex ties; repeated solves must agree
    a = [[1, 1, 1]]
    first = solve_lp([1, 1, 1], a, [1])
    for _ in range(3):
        assert solve_lp([1, 1, 1], a, [1]).x == first.x
    assert first.value == 1


def random_lp(draw):
    n = draw(st.integers(1, 4))
    m = draw(st.integers(1, 5))
    me = draw(st.integers(0, 2))
    ints = st.integers(-4, 4)
    c = [draw(ints) for _ in range(n)]
    A = [[draw(ints) for _ in range(n)] for _ in range(m)]
    b = [draw(ints) for _ in range(m)]
    Ae = [[draw(ints) for _ in range(n)] for _ in range(me)]
    be = [draw(ints) for _ in range(me)]
    free = draw(st.booleans())
    return c, A, b, Ae, be, free


@given(st.data())
def test_lp_agrees_with_highs(data):
    c, A, b, Ae, be, free = random_lp(data.draw)
    bounds = (None, None) if free else (0, None)
    ref = linprog(-np.array(c, dtype=float), A_ub=np.array(A, dtype=float), b_ub=b,
                  A_eq=np.array(Ae, dtype=float).reshape(len(Ae), len(c)) if Ae else None,
                  b_eq=be or None, bounds=bounds, method="highs")
    n = len(c)
    try:
        sol = solve_lp(c, A, b, Ae, be, free=free)
    except Infeasible as e:
        assert ref.status == 2
        y_ub, y_eq = e.certificate
        assert all(y >= 0 for y in y_ub)
        combo = [sum(y * r[j] for y, r in zip(y_ub, A)) + sum(y * r[j] for y, r in zip(y_eq, Ae))
                 for j in range(n)]
        assert all(v == 0 for v in combo) if free else all(v >= 0 for v in combo)
        assert dot(y_ub, b) + dot(y_eq, be) < 0
        return
    except Unbounded as e:
        assert ref.status == 3
        ray = e.ray
        assert dot(c, ray) > 0
        assert all(dot(r, ray) <= 0 for r in A) and all(dot(r, ray) == 0 for r in Ae)
        if not free:
            assert all(v >= 0 for v in ray)
        return
    assert ref.status == 0
    assert abs(float(sol.value) + ref.fun) < 1e-7
    x = sol.x
    assert all(dot(r, x) <= bi for r, bi in zip(A, b))
    assert all(dot(r, x) == bi for r, bi in zip(Ae, be))
    if not free:
        assert all(v >= 0 for v in x)
    assert dot(c, x) == sol.value
    # exact dual feasibility and zero duality gap
    assert all(y >= 0 for y in sol.dual_ub)
    for j in range(n):
        col = sum(y * r[j] for y, r in zip(sol.dual_ub, A)) + sum(y * r[j] for y, r in zip(sol.dual_eq, Ae))
        assert col == c[j] if free else col >= c[j]
    assert sol.duality_gap(b, be) == 0


def test_membership_vertex_unit_weight(mdl_1_10):
    verts = mdl_1_10.vertices
    cert = membership(verts[5], verts)
    assert cert and cert.weights == ((5, 1),)


def test_membership_pr_box_in_l0(sc222):
    verts = mdl_vertices(sc222, MdlParams(F(0), F(1, 3))).vertices
    pr = [F(1, 8) if (a[0] ^ a[1]) == (x[0] & x[1]) else F(0) for a, x in sc222.entries]
    cert = membership(pr, verts)
    assert cert and verify_inside(pr, verts, cert)


def hardy_joint(sc):
    """Hardy behavior with uniform inputs from closed-form amplitudes.

    State (|01> + |10> - |11>)/sqrt3; input 0 measures +/-, input 1 measures
    0/1. Amplitudes are (sign pattern)/sqrt3 times 1/2, 1/sqrt2 or 1, so every
    probability is rational.
    """
    psi = {(0, 1): 1, (1, 0): 1, (1, 1): -1}
    bases = {0: [(1, 1), (1, -1)], 1: [(1, 0), (0, 1)]}
    norms = {0: F(1, 2), 1: F(1)}
    vals = []
    for a, x in sc.entries:
        amp = sum(bases[x[0]][a[0]][s] * bases[x[1]][a[1]][t] * psi.get((s, t), 0)
                  for s in range(2) for t in range(2))
        vals.append(F(amp * amp, 3) * norms[x[0]] * norms[x[1]] / 4)
    return vals


def test_membership_hardy_outside(sc222, mdl_1_10):
    p = hardy_joint(sc222)
    assert sum(p) == 1 and p[0] == F(1, 48)
    verts = mdl_1_10.vertices
    cert = membership(p, verts)
    assert not cert
    assert cert.margin > 0 and verify_outside(p, verts, cert)
    # golden inequality is one separating witness
    g = golden(F(1, 10), F(7, 10))
    assert dot(g.beta, p) == F(1, 480)


@given(st.lists(st.tuples(*[st.integers(-4, 4)] * 3), min_size=1, max_size=7),
       st.tuples(*[st.integers(-8, 8)] * 3))
def test_membership_certificates(points, probe):
    pts = [tuple(F(v) for v in p) for p in points]
    q = tuple(F(v, 2) for v in probe)
    cert = membership(q, pts)
    if cert:
        assert verify_inside(q, pts, cert)
    else:
        assert cert.margin > 0 and verify_outside(q, pts, cert)


def test_check_inequality(sc222, mdl_1_10):
    verts = mdl_1_10.vertices
    norm = check_inequality(([1] * 16, 1), verts)
    assert norm.valid and norm.saturating_rank == 15 and not norm.is_facet
    rep = check_inequality(golden(F(1, 10), F(7, 10)), verts)
    assert rep.valid and not rep.orientation_flipped and rep.max_violation == 0
    assert rep.is_facet and rep.polytope_dimension == 15
    # +1 on p(1,0,0,0) only holds flipped: it is positivity of that entry
    beta = [0] * 16
    beta[sc222.index((1, 0), (0, 0))] = 1
    rep = check_inequality((beta, 0), verts)
    assert rep.valid and rep.orientation_flipped and rep.is_facet
    assert rep.stated_max_violation > 0
    with pytest.raises(ValueError):
        check_inequality(([0] * 16, 0), verts)


def test_redundancy_filter_small():
    h = HRep(1, [((1,), 1), ((1,), 2), ((-1,), 0)])
    out = redundancy_filter(h)
    assert sorted(out.ineqs) == sorted([((F(1),), F(1)), ((F(-1),), F(0))])
    dup = HRep(1, [((1,), 1), ((2,), 2), ((-1,), 0)])
    out, info = redundancy_filter(dup, report=True)
    assert len(out.ineqs) == 2 and info.duplicates == 1


def random_hrep(draw, n_rows):
    dim = 3
    rows = []
    for _ in range(n_rows):
        a = [draw(st.integers(-3, 3)) for _ in range(dim)]
        if any(a):
            rows.append((a, draw(st.integers(1, 6))))
    box = [(tuple(s * int(i == j) for i in range(dim)), 5) for j in range(dim) for s in (1, -1)]
    return HRep(dim, rows + box)


@given(st.data())
def test_clarkson_matches_sequential(data):
    h = random_hrep(data.draw, data.draw(st.integers(5, 60)))
    a = redundancy_filter(h, method="lp")
    b = redundancy_filter(h, method="clarkson")
    assert a.ineqs == b.ineqs
    # the filtered system describes the same polytope
    assert set(vertex_enumeration(a).vertices) == set(vertex_enumeration(h).vertices)


def test_intersect_with_equalities():
    box = HRep(2, [((1, 0), 1), ((0, 1), 1), ((-1, 0), 0), ((0, -1), 0)])
    out = intersect_with_equalities(box, [((1, -1), 0)])
    assert len(out.ineqs) == 2
    assert intersect_with_equalities(box, []).ineqs == redundancy_filter(box).ineqs
    with pytest.raises(InconsistentEqualities):
        intersect_with_equalities(box, [((1, 0), 0), ((1, 0), 1)])
