"""Linear inequalities on behaviors, the Bell-to-MDL transformation and symmetries."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .polytope import Limits, VRep, local_vertices
from .rational import as_vector, dot, format_rational, parse_rational
from .scenario import (ConditionalBehavior, InputDistribution, JointBehavior, MdlParams,
                       Scenario, conditional_to_joint, joint_to_conditional)

JOINT = "joint"
CONDITIONAL = "conditional"


class SpaceMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Inequality:
    """``beta . p <= bound`` over joint p(a,x) or conditional p(a|x) vectors."""
    scenario: Scenario
    space: str
    beta: tuple
    bound: Fraction = Fraction(0)
    name: str = field(default="", compare=False)
    trivial: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.space not in (JOINT, CONDITIONAL):
            raise ValueError(f"space must be 'joint' or 'conditional', not {self.space!r}")
        beta = as_vector(self.beta)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "bound", Fraction(self.bound))
        if len(beta) != self.scenario.size:
            raise ValueError(f"expected {self.scenario.size} coefficients, got {len(beta)}")
        if not any(beta):
            raise ValueError("all-zero coefficient vector")

    def coefficient(self, a, x) -> Fraction:
        return self.beta[self.scenario.index(a, x)]

    def flipped(self) -> "Inequality":
        return Inequality(self.scenario, self.space, tuple(-b for b in self.beta),
                          -self.bound, self.name)

    def to_json(self) -> dict:
        return {"scenario": self.scenario.to_dict(), "space": self.space,
                "beta": [format_rational(b) for b in self.beta],
                "bound": format_rational(self.bound)}

    @classmethod
    def from_json(cls, d: dict) -> "Inequality":
        return cls(Scenario.from_dict(d["scenario"]), d["space"],
                   [parse_rational(b) for b in d["beta"]], parse_rational(d["bound"]),
                   d.get("name", ""))


def from_terms(scenario: Scenario, space: str, terms, bound=0, name="") -> Inequality:
    """Build an inequality from ``{(a, x): coefficient}`` (accumulating repeats)."""
    beta = [Fraction(0)] * scenario.size
    for (a, x), c in terms:
        beta[scenario.index(a, x)] += Fraction(c)
    return Inequality(scenario, space, beta, bound, name)


def evaluate(ineq: Inequality, behavior, inputs: InputDistribution | None = None) -> Fraction:
    """Left-hand side ``beta . p``. Violation iff the result exceeds ``ineq.bound``.

    Plain vectors are taken to live in the inequality's space. Mixing a joint
    behavior and a conditional inequality (or the reverse) needs ``inputs``.
    """
    if isinstance(behavior, JointBehavior):
        if ineq.space == JOINT:
            return dot(ineq.beta, behavior.values)
        if inputs is None:
            raise SpaceMismatch("conditional inequality on a joint behavior needs an input distribution")
        if behavior.input_marginals() != inputs.values:
            raise SpaceMismatch("joint behavior marginals differ from the given input distribution")
        return dot(ineq.beta, joint_to_conditional(behavior).values)
    if isinstance(behavior, ConditionalBehavior):
        if ineq.space == CONDITIONAL:
            return dot(ineq.beta, behavior.values)
        if inputs is None:
            raise SpaceMismatch("joint inequality on a conditional behavior needs an input distribution")
        return dot(ineq.beta, conditional_to_joint(behavior, inputs).values)
    values = as_vector(behavior)
    if len(values) != len(ineq.beta):
        raise SpaceMismatch("vector length does not match the inequality")
    return dot(ineq.beta, values)


def evaluate_float(ineq: Inequality, values) -> float:
    return float(sum(float(b) * v for b, v in zip(ineq.beta, values) if b))


def bell_to_mdl(bell: Inequality, params: MdlParams) -> Inequality:
    """Joint-space MDL inequality valid on MDL(l, h) for a Bell inequality.

    Nonnegative coefficients are weighted by l, negative ones by h, and the
    bound becomes ``l h B``. With ``l = 0`` the result only bounds a
    nonpositive expression and is flagged ``trivial``.
    """
    if bell.space != CONDITIONAL:
        raise SpaceMismatch("bell_to_mdl expects a conditional-space inequality")
    l, h = Fraction(params.l), Fraction(params.h)
    beta = tuple(b * l if b >= 0 else b * h for b in bell.beta)
    if not any(beta):
        raise ValueError("transformed inequality is identically zero")
    name = f"mdl({bell.name})" if bell.name else ""
    return Inequality(bell.scenario, JOINT, beta, l * h * bell.bound, name, trivial=l == 0)


def mdl_bound(ineq: Inequality, vertices: VRep) -> Fraction:
    """Exact maximum of the left-hand side over the vertex set."""
    if ineq.space != JOINT:
        raise SpaceMismatch("mdl_bound needs a joint-space inequality")
    return max(dot(ineq.beta, v) for v in vertices.vertices)


def local_bound_check(bell: Inequality, scenario: Scenario | None = None) -> Fraction:
    """Maximum of a conditional inequality over deterministic local strategies."""
    if bell.space != CONDITIONAL:
        raise SpaceMismatch("local_bound_check expects a conditional-space inequality")
    scenario = scenario or bell.scenario
    # plain evaluation, so the enumeration limits of facet computations do not apply
    limits = Limits(max_dim=scenario.size, max_candidates=1 << 20)
    return max(dot(bell.beta, v) for v in local_vertices(scenario, limits).vertices)


# -- symmetries ---------------------------------------------------------------


@dataclass(frozen=True)
class SymmetryOp:
    """Relabelling of parties, inputs and outcomes.

    Party ``i`` becomes party ``perm[i]``; its input ``x`` becomes
    ``inputs[i][x]`` and, for that input, outcome ``a`` becomes
    ``outputs[i][x][a]``. A global per-party output flip uses the same
    outcome permutation for every input.
    """
    perm: tuple
    inputs: tuple
    outputs: tuple

    @classmethod
    def identity(cls, scenario: Scenario) -> "SymmetryOp":
        return cls(tuple(range(scenario.parties)),
                   tuple(tuple(range(n)) for n in scenario.inputs),
                   tuple(tuple(tuple(range(m)) for m in row) for row in scenario.outputs))

    def map_entry(self, a, x):
        n = len(self.perm)
        new_a = [0] * n
        new_x = [0] * n
        for i in range(n):
            j = self.perm[i]
            new_x[j] = self.inputs[i][x[i]]
            new_a[j] = self.outputs[i][x[i]][a[i]]
        return tuple(new_a), tuple(new_x)

    def compose(self, other: "SymmetryOp") -> "SymmetryOp":
        """``self`` after ``other``."""
        n = len(self.perm)
        perm = [0] * n
        inputs = [None] * n
        outputs = [None] * n
        for i in range(n):
            j = other.perm[i]
            perm[i] = self.perm[j]
            inputs[i] = tuple(self.inputs[j][other.inputs[i][x]] for x in range(len(other.inputs[i])))
            outputs[i] = tuple(
                tuple(self.outputs[j][other.inputs[i][x]][other.outputs[i][x][a]]
                      for a in range(len(other.outputs[i][x])))
                for x in range(len(other.inputs[i])))
        return SymmetryOp(tuple(perm), tuple(inputs), tuple(outputs))

    def inverse(self) -> "SymmetryOp":
        n = len(self.perm)
        perm = [0] * n
        inputs = [None] * n
        outputs = [None] * n
        for i in range(n):
            j = self.perm[i]
            perm[j] = i
            inv_x = [0] * len(self.inputs[i])
            for x, y in enumerate(self.inputs[i]):
                inv_x[y] = x
            inputs[j] = tuple(inv_x)
            outs = [None] * len(self.inputs[i])
            for x, y in enumerate(self.inputs[i]):
                inv_a = [0] * len(self.outputs[i][x])
                for a, b in enumerate(self.outputs[i][x]):
                    inv_a[b] = a
                outs[y] = tuple(inv_a)
            outputs[j] = tuple(outs)
        return SymmetryOp(tuple(perm), tuple(inputs), tuple(outputs))

    def index_map(self, scenario: Scenario) -> list:
        """``m[i]`` is the canonical index that entry ``i`` moves to."""
        return [scenario.index(*self.map_entry(a, x)) for a, x in scenario.entries]

    def apply_vector(self, scenario: Scenario, values: Sequence) -> tuple:
        out = [None] * len(values)
        for i, j in enumerate(self.index_map(scenario)):
            out[j] = values[i]
        return tuple(out)

    def apply(self, ineq: Inequality) -> Inequality:
        return Inequality(ineq.scenario, ineq.space, self.apply_vector(ineq.scenario, ineq.beta),
                          ineq.bound, ineq.name)


def symmetry_generators(scenario: Scenario, conditional_output_flips: bool = False) -> list:
    """Generators: party exchanges, input relabellings and outcome relabellings.

    Parties are exchanged only when they have identical input/output tables.
    Outcome relabellings are global per party unless ``conditional_output_flips``
    lets them depend on the party's input.
    """
    ident = SymmetryOp.identity(scenario)
    n = scenario.parties
    gens = []
    for i in range(n - 1):
        if scenario.inputs[i] == scenario.inputs[i + 1] and scenario.outputs[i] == scenario.outputs[i + 1]:
            perm = list(range(n))
            perm[i], perm[i + 1] = perm[i + 1], perm[i]
            gens.append(SymmetryOp(tuple(perm), ident.inputs, ident.outputs))
    for i in range(n):
        k = scenario.inputs[i]
        same_outputs = len(set(scenario.outputs[i])) == 1
        for s in range(k - 1):
            if not same_outputs and scenario.outputs[i][s] != scenario.outputs[i][s + 1]:
                continue
            swap = list(range(k))
            swap[s], swap[s + 1] = swap[s + 1], swap[s]
            inputs = list(ident.inputs)
            inputs[i] = tuple(swap)
            gens.append(SymmetryOp(ident.perm, tuple(inputs), ident.outputs))
        if conditional_output_flips:
            for x in range(k):
                m = scenario.outputs[i][x]
                for s in range(m - 1):
                    sw = list(range(m))
                    sw[s], sw[s + 1] = sw[s + 1], sw[s]
                    outputs = [list(r) for r in ident.outputs]
                    outputs[i][x] = tuple(sw)
                    gens.append(SymmetryOp(ident.perm, ident.inputs,
                                           tuple(tuple(r) for r in outputs)))
        elif same_outputs:
            m = scenario.outputs[i][0]
            for s in range(m - 1):
                sw = list(range(m))
                sw[s], sw[s + 1] = sw[s + 1], sw[s]
                outputs = [list(r) for r in ident.outputs]
                outputs[i] = [tuple(sw)] * k
                gens.append(SymmetryOp(ident.perm, ident.inputs,
                                       tuple(tuple(r) for r in outputs)))
    return gens


def symmetry_group(scenario: Scenario, conditional_output_flips: bool = False) -> list:
    """All group elements generated by :func:`symmetry_generators` (closure)."""
    gens = symmetry_generators(scenario, conditional_output_flips)
    ident = SymmetryOp.identity(scenario)
    seen = {ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for g in frontier:
            for s in gens:
                h = s.compose(g)
                if h not in seen:
                    seen.add(h)
                    order.append(h)
                    nxt.append(h)
        frontier = nxt
    return order


def inequality_key(beta, bound, eqs=()):
    """Hashable normal form under positive scaling (and modulo ``eqs``)."""
    from .polytope import canonical_inequality
    a, b = canonical_inequality(beta, bound, eqs)
    return a, b


def symmetry_orbit(ineq: Inequality, conditional_output_flips: bool = False,
                   eqs=()) -> list:
    """Distinct images of ``ineq`` under the symmetry group (deterministic order).

    Images are identified up to positive scaling and, if ``eqs`` is given,
    modulo those equalities (e.g. normalisation).
    """
    gens = symmetry_generators(ineq.scenario, conditional_output_flips)
    maps = [g.index_map(ineq.scenario) for g in gens]
    seen = {inequality_key(ineq.beta, ineq.bound, eqs)}
    orbit = [ineq]
    work = [ineq.beta]
    while work:
        beta = work.pop(0)
        for m in maps:
            new = [None] * len(beta)
            for i, j in enumerate(m):
                new[j] = beta[i]
            key = inequality_key(new, ineq.bound, eqs)
            if key not in seen:
                seen.add(key)
                orbit.append(Inequality(ineq.scenario, ineq.space, new, ineq.bound, ineq.name))
                work.append(tuple(new))
    return orbit


# -- catalog ------------------------------------------------------------------


def _sc222():
    return Scenario.uniform(2, 2, 2)


def eberhard() -> Inequality:
    """p(00|00) - p(01|01) - p(10|10) - p(00|11) <= 0."""
    sc = _sc222()
    return from_terms(sc, CONDITIONAL, [(((0, 0), (0, 0)), 1), (((0, 1), (0, 1)), -1),
                                        (((1, 0), (1, 0)), -1), (((0, 0), (1, 1)), -1)],
                      0, "eberhard")


def _chsh_terms(sc):
    for a, x in sc.entries:
        yield (a, x), (-1) ** ((a[0] ^ a[1]) ^ (x[0] * x[1]))


def chsh_conditional() -> Inequality:
    sc = _sc222()
    return from_terms(sc, CONDITIONAL, _chsh_terms(sc), 2, "chsh")


def chsh_joint() -> Inequality:
    """CHSH on full probabilities p(a,b,x,y); 1/2 is the bound for uniform inputs."""
    sc = _sc222()
    return from_terms(sc, JOINT, _chsh_terms(sc), Fraction(1, 2), "chsh_joint")


def golden(l, h) -> Inequality:
    """l p(0000) - h (p(0101) + p(1010) + p(0011)) <= 0, with p(a b x y)."""
    l, h = Fraction(l), Fraction(h)
    sc = _sc222()
    return from_terms(sc, JOINT, [(((0, 0), (0, 0)), l), (((0, 1), (0, 1)), -h),
                                  (((1, 0), (1, 0)), -h), (((0, 0), (1, 1)), -h)],
                      0, "golden")


def two_n_two(n: int, h) -> Inequality:
    """The (2, n, 2) family: prefactor (1 - (n^2 - n + 1) h) on p(0000)."""
    if n < 2:
        raise ValueError("two_n_two needs n >= 2")
    h = Fraction(h)
    sc = Scenario.uniform(2, n, 2)
    terms = [(((0, 0), (0, 0)), 1 - (n * n - n + 1) * h)]
    for i in range(1, n):
        terms += [(((1, 0), (i, 0)), -h), (((0, 1), (0, i)), -h), (((0, 0), (i, i)), -h)]
    return from_terms(sc, JOINT, terms, 0, f"two_n_two({n})")


def n_party_bell(N: int) -> Inequality:
    """p(0..0|0..0) - sum_j p(1_j|1_j) - p(0..0|1..1) <= 0 for N parties."""
    if N < 2:
        raise ValueError("n_party_bell needs N >= 2")
    sc = Scenario.uniform(N, 2, 2)
    zeros = (0,) * N
    ones = (1,) * N
    terms = [((zeros, zeros), 1), ((zeros, ones), -1)]
    for j in range(N):
        e = tuple(int(i == j) for i in range(N))
        terms.append(((e, e), -1))
    return from_terms(sc, CONDITIONAL, terms, 0, f"n_party_bell({N})")


def n_party_mdl(N: int, l, h) -> Inequality:
    return bell_to_mdl(n_party_bell(N), MdlParams(Fraction(l), Fraction(h)))


_CATALOG = {
    "eberhard": (eberhard, ()),
    "chsh_conditional": (chsh_conditional, ()),
    "chsh": (chsh_conditional, ()),
    "chsh_joint": (chsh_joint, ()),
    "golden": (golden, ("l", "h")),
    "two_n_two": (two_n_two, ("n", "h")),
    "n_party_bell": (n_party_bell, ("N",)),
    "n_party_mdl": (n_party_mdl, ("N", "l", "h")),
}


def catalog(name: str, **params) -> Inequality:
    """Named inequality; parameters are passed by keyword (l, h, n, N)."""
    try:
        fn, names = _CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown inequality {name!r}; known: {sorted(_CATALOG)}") from None
    missing = [p for p in names if p not in params]
    if missing:
        raise ValueError(f"{name} needs parameters {missing}")
    extra = set(params) - set(names)
    if extra:
        raise ValueError(f"{name} does not take parameters {sorted(extra)}")
    return fn(*(params[p] for p in names))


def catalog_names() -> list:
    return sorted(_CATALOG)
