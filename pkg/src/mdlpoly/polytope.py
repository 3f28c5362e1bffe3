"""Vertex sets for local, input, MDL, independent-source and nonsignaling polytopes.

Joint-space vectors follow the canonical index order of :mod:`mdlpoly.scenario`;
input-distribution vectors are indexed by input tuple in the same order.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import dd
from .linalg import affine_rank, rref, solve_affine
from .rational import as_vector, dot, format_rational, parse_rational, to_integer_row
from .scenario import MdlParams, PartyBounds, Scenario, SizeLimit, validate_mdl_params


class UnboundedPolyhedron(ValueError):
    pass


@dataclass
class Limits:
    max_dim: int = 64
    max_candidates: int = 20000


DEFAULT_LIMITS = Limits()


def _check_dim(dim, limits):
    limits = limits or DEFAULT_LIMITS
    if dim > limits.max_dim:
        raise SizeLimit(f"ambient dimension {dim} exceeds limit {limits.max_dim}")


def _check_count(count, limits):
    limits = limits or DEFAULT_LIMITS
    if count > limits.max_candidates:
        raise SizeLimit(f"{count} candidate vertices exceed limit {limits.max_candidates}")


@dataclass
class VRep:
    dim: int
    vertices: list

    def __post_init__(self):
        self.vertices = [as_vector(v) for v in self.vertices]
        for v in self.vertices:
            if len(v) != self.dim:
                raise ValueError(f"vertex of length {len(v)} in dimension {self.dim}")

    def __len__(self):
        return len(self.vertices)

    def to_json(self) -> dict:
        return {"dim": self.dim,
                "vertices": [[format_rational(x) for x in v] for v in self.vertices]}

    @classmethod
    def from_json(cls, d: dict) -> "VRep":
        return cls(int(d["dim"]), [[parse_rational(x) for x in v] for v in d["vertices"]])


@dataclass
class HRep:
    """``a . p <= b`` for each (a, b) in ``ineqs``; ``a . p = b`` for ``eqs``."""
    dim: int
    ineqs: list = field(default_factory=list)
    eqs: list = field(default_factory=list)

    def __post_init__(self):
        self.ineqs = [(as_vector(a), Fraction(b)) for a, b in self.ineqs]
        self.eqs = [(as_vector(a), Fraction(b)) for a, b in self.eqs]
        for a, _ in self.ineqs + self.eqs:
            if len(a) != self.dim:
                raise ValueError(f"row of length {len(a)} in dimension {self.dim}")

    def contains(self, p) -> bool:
        return (all(dot(a, p) <= b for a, b in self.ineqs)
                and all(dot(a, p) == b for a, b in self.eqs))

    def to_json(self) -> dict:
        def row(a, b):
            return {"a": [format_rational(x) for x in a], "b": format_rational(b)}
        return {"dim": self.dim, "ineqs": [row(a, b) for a, b in self.ineqs],
                "eqs": [row(a, b) for a, b in self.eqs]}

    @classmethod
    def from_json(cls, d: dict) -> "HRep":
        def row(r):
            return [parse_rational(x) for x in r["a"]], parse_rational(r["b"])
        return cls(int(d["dim"]), [row(r) for r in d.get("ineqs", [])],
                   [row(r) for r in d.get("eqs", [])])


# -- vertex constructions -----------------------------------------------------


def local_vertices(scenario: Scenario, limits: Limits | None = None) -> VRep:
    """Deterministic strategies as conditional behaviors p(a|x) in {0, 1}."""
    _check_dim(scenario.size, limits)
    count = math.prod(m for row in scenario.outputs for m in row)
    _check_count(count, limits)
    # one response function per party: a tuple of outcomes indexed by its input
    per_party = [list(itertools.product(*(range(m) for m in scenario.outputs[i])))
                 for i in range(scenario.parties)]
    zero, one = Fraction(0), Fraction(1)
    verts = []
    for strategy in itertools.product(*per_party):
        v = [zero] * scenario.size
        for x in scenario.contexts:
            a = tuple(strategy[i][xi] for i, xi in enumerate(x))
            v[scenario.index(a, x)] = one
        verts.append(v)
    return VRep(scenario.size, verts)


def _distinct_permutations(pattern):
    """Distinct permutations in lexicographic order (multiset aware)."""
    items = sorted(pattern)
    n = len(items)
    while True:
        yield tuple(items)
        i = n - 2
        while i >= 0 and items[i] >= items[i + 1]:
            i -= 1
        if i < 0:
            return
        j = n - 1
        while items[j] <= items[i]:
            j -= 1
        items[i], items[j] = items[j], items[i]
        items[i + 1:] = reversed(items[i + 1:])


def input_pattern(k: int, l: Fraction, h: Fraction) -> tuple:
    """The sorted pattern ``(l x t, h x (K-t-1), rest)`` of the input box-simplex."""
    if l == h:
        return (l,) * k
    t = math.floor((k * h - 1) / (h - l))
    t = min(t, k - 1)
    rest = 1 - t * l - (k - t - 1) * h
    return (l,) * t + (h,) * (k - t - 1) + (rest,)


def input_vertices(scenario: Scenario, params: MdlParams, limits: Limits | None = None) -> VRep:
    """Vertices of ``{q : l <= q(x) <= h, sum q = 1}`` over input tuples."""
    params = validate_mdl_params(scenario, params.l, params.h)
    k = scenario.n_contexts
    _check_dim(k, limits)
    pattern = input_pattern(k, params.l, params.h)
    limit = (limits or DEFAULT_LIMITS).max_candidates
    verts = []
    for perm in _distinct_permutations(pattern):
        verts.append(perm)
        if len(verts) > limit:
            raise SizeLimit(f"more than {limit} input vertices")
    return VRep(k, verts)


def product_vertices(p: VRep, q: VRep, p_index: Sequence, q_index: Sequence,
                     out_index: Sequence, minimize: bool = True,
                     limits: Limits | None = None) -> VRep:
    """Componentwise products ``r(k,l,l') = p(k,l) q(k,l')`` of all vertex pairs.

    ``p_index[j] = (k, l)`` labels coordinate j of P, likewise ``q_index`` for
    Q with labels ``(k, l')``; ``out_index[j] = (k, l, l')`` lists the output
    coordinates. The shared axis ``k`` couples the two polytopes.
    """
    if len(p_index) != p.dim or len(q_index) != q.dim:
        raise ValueError("index labels do not match vertex dimension")
    _check_count(len(p) * len(q), limits)
    _check_dim(len(out_index), limits)
    pos_p = {lab: j for j, lab in enumerate(p_index)}
    pos_q = {lab: j for j, lab in enumerate(q_index)}
    try:
        pairs = [(pos_p[(k, l)], pos_q[(k, lq)]) for k, l, lq in out_index]
    except KeyError as e:
        raise ValueError(f"output label {e} has no matching coordinate") from None
    verts = []
    for vp in p.vertices:
        for vq in q.vertices:
            verts.append([vp[i] * vq[j] for i, j in pairs])
    out = VRep(len(out_index), verts)
    return remove_redundant_vertices(out) if minimize else out


def mdl_vertices(scenario: Scenario, params: MdlParams, minimize: bool = True,
                 limits: Limits | None = None, inputs: VRep | None = None) -> VRep:
    """Joint-space vertices: input vertex times local deterministic vertex.

    ``inputs`` replaces the input polytope (used for independent sources).
    """
    if inputs is None:
        inputs = input_vertices(scenario, params, limits)
    local = local_vertices(scenario, limits)
    ctx = scenario.contexts
    p_index = [(x, None) for x in ctx]
    q_index = [(x, a) for a, x in scenario.entries]
    out_index = [(x, None, a) for a, x in scenario.entries]
    return product_vertices(inputs, local, p_index, q_index, out_index, minimize, limits)


def independent_input_vertices(scenario: Scenario, bounds: PartyBounds,
                               limits: Limits | None = None) -> VRep:
    """Product input distributions with ``l_i <= p(x_i) <= h_i`` per party."""
    bounds.validate(scenario)
    result = VRep(1, [(Fraction(1),)])
    labels = [()]
    for i, ((l, h), n) in enumerate(zip(bounds.bounds, scenario.inputs)):
        fake = Scenario(1, (n,), ((1,) * n,))
        if n == 1:
            party = VRep(1, [(Fraction(1),)])
        else:
            party = _box_simplex_vertices(fake.n_contexts, l, h, limits)
        p_index = [(0, lab) for lab in labels]
        q_index = [(0, xi) for xi in range(n)]
        new_labels = [lab + (xi,) for lab in labels for xi in range(n)]
        out_index = [(0, lab[:-1], lab[-1]) for lab in new_labels]
        result = product_vertices(result, party, p_index, q_index, out_index,
                                  minimize=True, limits=limits)
        labels = new_labels
    # labels are input tuples in lexicographic order = canonical context order
    assert labels == list(scenario.contexts)
    return result


def _box_simplex_vertices(k, l, h, limits):
    pattern = input_pattern(k, Fraction(l), Fraction(h))
    return VRep(k, list(_distinct_permutations(pattern)))


# -- nonsignaling polytope ----------------------------------------------------


def ns_polytope_hrep(scenario: Scenario, limits: Limits | None = None) -> HRep:
    """Positivity, per-context normalisation and nonsignaling equalities.

    Nonsignaling rows compare the marginal of the parties other than ``j``
    between ``x_j = 0`` and every other ``x_j``, with the remaining inputs fixed.
    """
    _check_dim(scenario.size, limits)
    d = scenario.size
    zero, one = Fraction(0), Fraction(1)
    ineqs = []
    for i in range(d):
        a = [zero] * d
        a[i] = -one
        ineqs.append((a, zero))
    eqs = []
    for x in scenario.contexts:
        a = [zero] * d
        for out in scenario.outcomes(x):
            a[scenario.index(out, x)] = one
        eqs.append((a, one))
    for j in range(scenario.parties):
        others = [i for i in range(scenario.parties) if i != j]
        for x in scenario.contexts:
            if x[j] == 0:
                continue
            x0 = x[:j] + (0,) + x[j + 1:]
            for rest in itertools.product(*(range(scenario.outputs[i][x[i]]) for i in others)):
                a = [zero] * d
                for x_, sign in ((x, one), (x0, -one)):
                    for out in scenario.outcomes(x_):
                        if tuple(out[i] for i in others) == rest:
                            a[scenario.index(out, x_)] += sign
                eqs.append((a, zero))
    return HRep(d, ineqs, eqs)


def ns_joint_equalities(scenario: Scenario, inputs) -> list:
    """Normalisation and nonsignaling equalities in joint space for fixed ``inputs``.

    With ``p(a, x) = q(x) p(a|x)`` each conditional equality becomes linear in
    the joint entries; every ``q(x)`` must be positive.
    """
    from .scenario import ZeroInputProbability

    q = inputs.values
    if any(v == 0 for v in q):
        raise ZeroInputProbability("nonsignaling in joint space needs every q(x) > 0")
    weight = []
    for ci, x in enumerate(scenario.contexts):
        weight.extend([q[ci]] * scenario.block_size(x))
    return [([c / w if c else c for c, w in zip(a, weight)], b)
            for a, b in ns_polytope_hrep(scenario).eqs]


# -- representation conversion ------------------------------------------------


def polyhedron_generators(hrep: HRep):
    """Vertices and extreme recession rays of a pointed polyhedron.

    Raises :class:`UnboundedPolyhedron` when the polyhedron contains a line.
    An empty polyhedron yields no vertices.
    """
    d = hrep.dim
    if hrep.eqs:
        try:
            x0, cols, _, _, _ = solve_affine([a for a, _ in hrep.eqs], [b for _, b in hrep.eqs])
        except ValueError:
            return [], []
    else:
        x0 = [Fraction(0)] * d
        cols = [[Fraction(int(i == j)) for i in range(d)] for j in range(d)]
    k = len(cols)
    if k == 0:
        return ([tuple(x0)] if all(dot(a, x0) <= b for a, b in hrep.ineqs) else []), []
    # cone over (t, y): t (b - a.x0) - (a N) y >= 0 and t >= 0
    rows = [[Fraction(1)] + [Fraction(0)] * k]
    for a, b in hrep.ineqs:
        rows.append([b - dot(a, x0)] + [-dot(a, c) for c in cols])
    try:
        rays, _ = dd.extreme_rays(rows, k + 1)
    except dd.NotPointed:
        raise UnboundedPolyhedron("polyhedron contains a line") from None

    def lift(y, shift):
        return tuple((x0[i] if shift else 0) + sum((c[i] * yj for c, yj in zip(cols, y) if c[i]),
                                                  Fraction(0)) for i in range(d))

    verts, rec = [], []
    for r in rays:
        t = r[0]
        if t == 0:
            rec.append(lift([Fraction(v) for v in r[1:]], False))
        else:
            verts.append(lift([Fraction(v, t) for v in r[1:]], True))
    if not verts:
        rec = []
    return sorted(verts), rec


def vertex_enumeration(hrep: HRep, limits: Limits | None = None) -> VRep:
    """Vertices of a bounded polyhedron given by inequalities and equalities."""
    _check_dim(hrep.dim, limits)
    verts, rec = polyhedron_generators(hrep)
    if rec:
        raise UnboundedPolyhedron("polyhedron has an unbounded direction")
    return VRep(hrep.dim, verts)


def affine_hull(vertices: Sequence[Sequence]):
    """Equalities ``(a, b)`` in reduced echelon form cutting out aff(vertices)."""
    v0 = vertices[0]
    d = len(v0)
    diffs = [[x - y for x, y in zip(v, v0)] for v in vertices[1:]]
    from .linalg import nullspace
    normals = nullspace(diffs, d) if diffs else [
        [Fraction(int(i == j)) for i in range(d)] for j in range(d)]
    if not normals:
        return []
    red, _ = rref([list(n) + [dot(n, v0)] for n in normals], d + 1)
    return [(tuple(r[:d]), r[d]) for r in red]


def affine_dimension(v: VRep | Sequence[Sequence]) -> int:
    verts = v.vertices if isinstance(v, VRep) else v
    if not verts:
        raise ValueError("affine dimension of an empty vertex set")
    return affine_rank(verts)


def remove_redundant_vertices(v: VRep, certificates: bool = False):
    """Drop duplicates and points in the hull of the others.

    With ``certificates=True`` also returns, for every input position, either
    ``("kept", Outside)`` or ``("removed", Inside over the kept list)``.
    """
    from .lp import membership

    seen = {}
    order = []
    for i, vert in enumerate(v.vertices):
        if vert not in seen:
            seen[vert] = i
            order.append(vert)
    current = list(order)
    # remove one at a time, testing against everything still present
    i = 0
    while i < len(current):
        others = current[:i] + current[i + 1:]
        if others and membership(current[i], others):
            current.pop(i)
        else:
            i += 1
    out = VRep(v.dim, current)
    if not certificates:
        return out
    certs = []
    for vert in v.vertices:
        if vert in current:
            k = current.index(vert)
            certs.append(("kept", membership(vert, current[:k] + current[k + 1:]) if len(current) > 1 else None))
        else:
            certs.append(("removed", membership(vert, current)))
    return out, certs


# -- facet enumeration --------------------------------------------------------


def canonical_inequality(a, b, eqs=()):
    """Normal form of ``a.p <= b`` modulo the equalities ``eqs`` (echelon form).

    Pivot coordinates of the equalities are eliminated, then the row is
    scaled by a positive factor so its first nonzero coefficient is +1 or -1.
    """
    a = list(a)
    b = Fraction(b)
    for e, eb in eqs:
        pivot = next(j for j, x in enumerate(e) if x)
        f = a[pivot]
        if f:
            a = [x - f * y for x, y in zip(a, e)]
            b -= f * eb
    lead = next((x for x in a if x), None)
    if lead is None:
        return tuple(a), b
    s = abs(lead)
    return tuple(x / s for x in a), b / s


def facet_enumeration(v: VRep, limits: Limits | None = None) -> HRep:
    """Irredundant facets of conv(v) within its affine hull, plus the hull equalities."""
    verts = v.vertices
    if not verts:
        raise ValueError("empty vertex list")
    _check_dim(v.dim, limits)
    _check_count(len(verts), limits)
    eqs = affine_hull(verts)
    pivots = {next(j for j, x in enumerate(a) if x) for a, _ in eqs}
    free = [j for j in range(v.dim) if j not in pivots]
    if not free:
        return HRep(v.dim, [], eqs)
    # cone of valid (b, a_free): b - a.w >= 0 for each projected vertex w
    rows = [[Fraction(1)] + [-vert[j] for j in free] for vert in verts]
    rays, _ = dd.extreme_rays(rows, len(free) + 1)
    ineqs = []
    for r in rays:
        if not any(r[1:]):
            continue
        a = [Fraction(0)] * v.dim
        for j, x in zip(free, r[1:]):
            a[j] = Fraction(x)
        ineqs.append(canonical_inequality(a, r[0], eqs))
    ineqs.sort()
    return HRep(v.dim, ineqs, eqs)
