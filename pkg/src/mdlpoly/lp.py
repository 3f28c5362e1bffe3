"""Exact linear programming, membership certificates and facet checks.

All routines work over ``Fraction`` and never round. The solver is the
integer-pivoting simplex in :mod:`mdlpoly.simplex`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import simplex
from .rational import dot, format_rational


class LPError(ValueError):
    pass


class Infeasible(LPError):
    """The LP has no feasible point. ``certificate`` = (y_ub, y_eq) Farkas multipliers."""

    def __init__(self, message, certificate=None):
        super().__init__(message)
        self.certificate = certificate


class Unbounded(LPError):
    """The objective is unbounded. ``ray`` is an improving feasible direction."""

    def __init__(self, message, ray=None):
        super().__init__(message)
        self.ray = ray


@dataclass
class LPSolution:
    value: Fraction
    x: tuple
    dual_ub: tuple
    dual_eq: tuple

    def duality_gap(self, b_ub=(), b_eq=()) -> Fraction:
        return dot(self.dual_ub, b_ub) + dot(self.dual_eq, b_eq) - self.value


def _as_rows(A):
    return [[Fraction(v) for v in row] for row in A]


def solve_lp(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
             A_eq: Sequence[Sequence] = (), b_eq: Sequence = (), free=False) -> LPSolution:
    """Maximise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative unless ``free`` is True (all free) or a sequence
    of booleans marking the free ones. Raises :class:`Infeasible` or
    :class:`Unbounded` with an exact certificate.

    The returned duals satisfy ``y_ub >= 0``, ``y_ub A_ub + y_eq A_eq >= c``
    (with equality on free variables) and zero duality gap.
    """
    c = [Fraction(v) for v in c]
    n = len(c)
    A_ub, A_eq = _as_rows(A_ub), _as_rows(A_eq)
    b_ub = [Fraction(v) for v in b_ub]
    b_eq = [Fraction(v) for v in b_eq]
    if len(A_ub) != len(b_ub) or len(A_eq) != len(b_eq):
        raise ValueError("constraint matrix and right-hand side lengths differ")
    for row in A_ub + A_eq:
        if len(row) != n:
            raise ValueError("constraint row length does not match objective")
    if isinstance(free, bool):
        free = [free] * n
    free = list(free)

    # column layout: x+ (n), x- for free vars, slacks (one per ub row)
    neg_cols = [j for j in range(n) if free[j]]
    n_std = n + len(neg_cols) + len(A_ub)
    rows, rhs, hint = [], [], []
    for k, (row, bk) in enumerate(zip(A_ub, b_ub)):
        slack = [Fraction(0)] * len(A_ub)
        slack[k] = Fraction(1)
        rows.append(row + [-row[j] for j in neg_cols] + slack)
        rhs.append(bk)
        hint.append(n + len(neg_cols) + k)
    for row, bk in zip(A_eq, b_eq):
        rows.append(row + [-row[j] for j in neg_cols] + [Fraction(0)] * len(A_ub))
        rhs.append(bk)
        hint.append(None)
    cost = c + [-c[j] for j in neg_cols] + [Fraction(0)] * len(A_ub)
    res = simplex.solve_standard(cost, rows, rhs, hint)
    m_ub = len(A_ub)
    if res.status == simplex.INFEASIBLE:
        y = res.y
        raise Infeasible("LP is infeasible", (tuple(y[:m_ub]), tuple(y[m_ub:])))
    if res.status == simplex.UNBOUNDED:
        ray = res.ray
        direction = list(ray[:n])
        for k, j in enumerate(neg_cols):
            direction[j] -= ray[n + k]
        raise Unbounded("LP is unbounded", tuple(direction))
    x = list(res.x[:n])
    for k, j in enumerate(neg_cols):
        x[j] -= res.x[n + k]
    y = res.y
    return LPSolution(res.value, tuple(x), tuple(y[:m_ub]), tuple(y[m_ub:]))


# -- membership -----------------------------------------------------------


@dataclass
class Inside:
    """Point is a convex combination of the listed vertices."""
    weights: tuple  # (vertex index, weight) pairs with positive weight

    def __bool__(self):
        return True


@dataclass
class Outside:
    """Separating hyperplane: ``a.v <= bound`` for every vertex, ``a.p > bound``."""
    a: tuple
    bound: Fraction
    margin: Fraction  # a.p - bound > 0

    def __bool__(self):
        return False


def membership(point: Sequence, vertices: Sequence[Sequence]):
    """Decide whether ``point`` lies in conv(``vertices``), exactly.

    Returns :class:`Inside` with convex weights or :class:`Outside` with a
    separating hyperplane certificate.
    """
    p = [Fraction(v) for v in point]
    verts = [[Fraction(v) for v in vert] for vert in vertices]
    d = len(p)
    if not verts:
        raise ValueError("empty vertex list")
    if any(len(v) != d for v in verts):
        raise ValueError("vertex dimension does not match point")
    nv = len(verts)
    rows = [[verts[k][j] for k in range(nv)] for j in range(d)]
    rows.append([Fraction(1)] * nv)
    rhs = p + [Fraction(1)]
    res = simplex.solve_standard([0] * nv, rows, rhs)
    if res.status == simplex.OPTIMAL:
        weights = tuple((k, w) for k, w in enumerate(res.x) if w)
        return Inside(weights)
    # y.A_k >= 0 for every vertex, y.(p,1) < 0
    y = res.y
    a = tuple(-v for v in y[:d])
    bound = y[d]
    margin = dot(a, p) - bound
    return Outside(a, bound, margin)


def verify_inside(point, vertices, cert: Inside) -> bool:
    total = sum((w for _, w in cert.weights), Fraction(0))
    if total != 1 or any(w < 0 for _, w in cert.weights):
        return False
    combo = [Fraction(0)] * len(point)
    for k, w in cert.weights:
        for j, v in enumerate(vertices[k]):
            combo[j] += w * v
    return combo == [Fraction(v) for v in point]


def verify_outside(point, vertices, cert: Outside) -> bool:
    if any(dot(cert.a, v) > cert.bound for v in vertices):
        return False
    return dot(cert.a, point) - cert.bound > 0


# -- single inequality against a vertex list ---------------------------------


@dataclass
class FacetReport:
    valid: bool
    max_violation: Fraction  # max over vertices of a.v - bound, final orientation
    saturating_count: int
    saturating_rank: int  # affine dimension of the saturating vertices (-1 if none)
    is_facet: bool
    orientation_flipped: bool
    polytope_dimension: int
    stated_max_violation: Fraction  # same quantity for the orientation as given

    def to_json(self) -> dict:
        return {"valid": self.valid, "max_violation": format_rational(self.max_violation),
                "saturating_count": self.saturating_count,
                "saturating_rank": self.saturating_rank, "is_facet": self.is_facet,
                "orientation_flipped": self.orientation_flipped,
                "polytope_dimension": self.polytope_dimension,
                "stated_max_violation": format_rational(self.stated_max_violation)}


def _coefficients(ineq):
    if hasattr(ineq, "beta"):
        return ineq.beta, Fraction(ineq.bound)
    a, b = ineq
    return tuple(Fraction(v) for v in a), Fraction(b)


def check_inequality(ineq, vertices, dim: int | None = None) -> FacetReport:
    """Validity and facet test of ``a.p <= b`` on the hull of ``vertices``.

    ``ineq`` is an Inequality or an ``(a, b)`` pair. If the stated orientation
    is violated, ``-a.p <= -b`` is tried and ``orientation_flipped`` is set
    when that one holds. ``dim`` is the polytope's affine dimension.
    """
    from .linalg import affine_rank

    verts = vertices.vertices if hasattr(vertices, "vertices") else vertices
    a, b = _coefficients(ineq)
    if not any(a):
        raise ValueError("all-zero coefficient vector")
    vals = [dot(a, v) - b for v in verts]
    stated = max(vals)
    flipped = False
    if stated > 0 and -min(vals) <= 0:
        flipped = True
        vals = [-v for v in vals]
    worst = max(vals)
    valid = worst <= 0
    dim = affine_rank(verts) if dim is None else dim
    sat = [verts[k] for k, v in enumerate(vals) if v == 0]
    sat_rank = affine_rank(sat) if sat else -1
    return FacetReport(valid, worst, len(sat), sat_rank, valid and sat_rank == dim - 1,
                       flipped, dim, stated)


# -- redundancy removal and intersection ---------------------------------------


class InconsistentEqualities(LPError):
    pass


@dataclass
class FilterReport:
    """Bookkeeping of :func:`redundancy_filter`."""
    input_count: int
    duplicates: int
    kept: int
    removed_by_lp: int


def _implied(a, b, kept, eqs) -> bool:
    """True if ``a.x <= b`` follows from the kept rows and equalities (LP certificate)."""
    n = len(a)
    try:
        sol = solve_lp(a, [r for r, _ in kept], [s for _, s in kept],
                       [r for r, _ in eqs], [s for _, s in eqs], free=True)
    except Unbounded:
        return False
    except Infeasible:
        return True
    assert sol.duality_gap([s for _, s in kept], [s for _, s in eqs]) == 0
    return sol.value <= b


def _reduced_rows(rows, eqs, dim):
    """Rewrite rows in the coordinates y of ``x = x0 + N y`` parametrising ``eqs``."""
    from .linalg import solve_affine

    if not eqs:
        return [(tuple(a), b) for a, b in rows]
    x0, cols, _, _, _ = solve_affine([a for a, _ in eqs], [b for _, b in eqs])
    return [(tuple(dot(a, c) for c in cols), b - dot(a, x0)) for a, b in rows]


def _interior_point(rows, batch: int = 16):
    """A point with every slack ``b - a.y`` strictly positive, or None.

    Cutting-plane solution of ``max t  s.t.  a.y + |a|_1 t <= b, t <= 1``:
    solve on a subset, add the most violated rows, repeat.
    """
    import numpy as np

    n = len(rows[0][0])
    norms = [sum(abs(x) for x in a) for a, _ in rows]
    A = np.array([[float(x) for x in a] for a, _ in rows])
    B = np.array([float(b) for _, b in rows])
    N = np.array([float(x) for x in norms])
    subset = []
    in_subset = np.zeros(len(rows), dtype=bool)
    while True:
        A_ub = [list(rows[k][0]) + [norms[k]] for k in subset] + [[0] * n + [1]]
        b_ub = [rows[k][1] for k in subset] + [1]
        sol = solve_lp([0] * n + [1], A_ub, b_ub, free=[True] * n + [True])
        y, t = sol.x[:n], sol.x[n]
        if t <= 0:
            return None
        yf = np.array([float(v) for v in y])
        gap = (B - A @ yf) / N - float(t)
        gap[in_subset] = np.inf
        order = np.argsort(gap)[:batch]
        add = [int(k) for k in order if gap[k] < 1e-12]
        if not add:
            exact = [k for k in range(len(rows)) if not in_subset[k]
                     and rows[k][1] - dot(rows[k][0], y) < norms[k] * t]
            if not exact:
                return list(y)
            add = exact[:batch]
        subset.extend(add)
        in_subset[add] = True


def _witness(a_k, b_k, sub, c):
    """None if ``a_k.y <= b_k`` is implied by ``sub``, else a point of ``sub`` violating it.

    Solves ``min lam.b  s.t.  lam A = a_k, lam >= 0`` so the tableau has one
    row per coordinate however many rows ``sub`` holds. ``c`` is a point
    strictly inside ``sub``, used to turn a Farkas ray into a point.
    """
    from .simplex import INFEASIBLE, OPTIMAL, solve_standard

    n = len(a_k)
    if not sub:
        y = None
    else:
        A = [[row[0][i] for row in sub] for i in range(n)]
        res = solve_standard([-row[1] for row in sub], A, list(a_k))
        if res.status == OPTIMAL:
            if -res.value <= b_k:
                return None
            return [-v for v in res.y]
        if res.status != INFEASIBLE:
            raise LPError(f"unexpected status {res.status} in redundancy test")
        y = res.y
    # a_k is outside the cone of the sub normals: u = -y satisfies A u <= 0 < a_k.u
    if y is None:
        u = list(a_k)
    else:
        u = [-v for v in y]
    t = (b_k - dot(a_k, c)) / dot(a_k, u) + 1
    return [x + t * v for x, v in zip(c, u)]


def _clarkson(rows):
    """Indices of irredundant rows of ``a.y <= b`` (full-dimensional case).

    Returns None when no strictly interior point exists.
    """
    import numpy as np

    c = _interior_point(rows)
    if c is None:
        return None
    slack = [b - dot(a, c) for a, b in rows]
    A = np.array([[float(x) for x in a] for a, _ in rows])
    S = np.array([float(s) for s in slack])
    status = [None] * len(rows)
    kept = []
    for k in range(len(rows)):
        if status[k] is not None:
            continue
        a_k, b_k = rows[k]
        while True:
            point = _witness(a_k, b_k, [rows[i] for i in kept], c)
            if point is None:
                status[k] = "redundant"
                break
            d = [x - y for x, y in zip(point, c)]
            # first hyperplane hit along c + s d, s > 0
            ad = A @ np.array([float(v) for v in d])
            with np.errstate(divide="ignore", invalid="ignore"):
                s = np.where(ad > 0, S / ad, np.inf)
            smin = s.min()
            cand = np.nonzero(s <= smin * (1 + 1e-9) + 1e-300)[0]
            exact = []
            for j in cand:
                den = dot(rows[j][0], d)
                if den > 0:
                    exact.append((slack[j] / den, int(j)))
            best = min(v for v, _ in exact)
            hit = [j for v, j in exact if v == best]
            for j in hit:
                if status[j] is None:
                    status[j] = "kept"
                    kept.append(j)
            if k in hit:
                break
    # tied hits can admit a redundant row; clean up within the kept set
    final = list(kept)
    i = 0
    while i < len(final):
        others = [rows[o] for o in final[:i] + final[i + 1:]]
        if _witness(*rows[final[i]], others, c) is None:
            final.pop(i)
        else:
            i += 1
    return sorted(final)


def redundancy_filter(hrep, method: str = "auto", report: bool = False):
    """Remove every inequality implied by the others together with the equalities.

    ``method="lp"`` tests rows one at a time with an exact LP against all
    remaining rows. ``"clarkson"`` finds a strictly interior point and tests
    each row with an LP over the irredundant rows found so far, discovering
    new ones by exact ray shooting; LP size then scales with the output.
    Every removal is certified by an exact LP optimum in both methods.
    ``"auto"`` uses Clarkson's method for long lists.
    """
    from .linalg import rref
    from .polytope import HRep

    dim = hrep.dim
    eqs = list(hrep.eqs)
    if eqs:
        red, piv = rref([list(a) + [b] for a, b in eqs], dim + 1)
        if dim in piv:
            raise InconsistentEqualities("equalities have no common solution")
        eqs = [(tuple(r[:dim]), r[dim]) for r in red]
    rows, duplicates = _canonical_rows(hrep.ineqs, eqs)
    if method == "auto":
        method = "clarkson" if len(rows) > 40 else "lp"
    if method == "clarkson" and rows:
        keep = _clarkson(_reduced_rows(rows, eqs, dim))
        if keep is not None:
            kept = [rows[k] for k in keep]
            out = HRep(dim, sorted(kept), eqs)
            info = FilterReport(len(hrep.ineqs), duplicates, len(kept), len(rows) - len(kept))
            return (out, info) if report else out
    kept = list(rows)
    i = 0
    removed = 0
    while i < len(kept):
        a, b = kept[i]
        if _implied(a, b, kept[:i] + kept[i + 1:], eqs):
            kept.pop(i)
            removed += 1
        else:
            i += 1
    out = HRep(dim, sorted(kept), eqs)
    info = FilterReport(len(hrep.ineqs), duplicates, len(kept), removed)
    return (out, info) if report else out


def _canonical_rows(ineqs, eqs):
    """Normal forms modulo ``eqs``; one row per normal vector (tightest bound)."""
    from .polytope import canonical_inequality

    best = {}
    for a, b in ineqs:
        ca, cb = canonical_inequality(a, b, eqs)
        if not any(ca):
            if cb < 0:
                raise Infeasible("inequality 0 <= negative bound")
            continue
        if ca not in best or cb < best[ca]:
            best[ca] = cb
    rows = list(best.items())
    return rows, len(ineqs) - len(rows)


def _in_span(e, eqs, dim):
    from .linalg import rank
    rows = [list(a) + [b] for a, b in eqs]
    return rank(rows + [list(e[0]) + [e[1]]]) == rank(rows) if rows else not any(e[0])


def intersect_with_equalities(hrep, equalities, method: str = "auto", report: bool = False):
    """Restrict ``hrep`` to ``{x : a.x = b for (a, b) in equalities}`` and filter.

    Variables are eliminated by exact Gaussian elimination: inequalities are
    rewritten modulo the combined equality system (pivot coordinates
    eliminated), so the surviving coefficients live on the free coordinates.
    """
    from .polytope import HRep

    eqs = list(hrep.eqs) + [(tuple(Fraction(v) for v in a), Fraction(b)) for a, b in equalities]
    if not eqs:
        return redundancy_filter(hrep, method, report)
    from .linalg import rref
    red, piv = rref([list(a) + [b] for a, b in eqs], hrep.dim + 1)
    if hrep.dim in piv:
        raise InconsistentEqualities("equality system is inconsistent")
    return redundancy_filter(HRep(hrep.dim, hrep.ineqs, eqs), method, report)
