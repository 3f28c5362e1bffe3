"""Scenarios, behavior vectors and their canonical index order.

Canonical order: input tuples are outermost, enumerated lexicographically with
party 1 most significant; within one input tuple, outcome tuples are enumerated
the same way. For (2,2,2) the index of p(a,b,x,y) is ``4*(2*x+y) + 2*a+b``.
Blocks have size ``prod_i m_i^{x_i}`` so outcomes that cannot occur for an
input never get an index.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

from .rational import as_vector, format_rational, parse_rational

MAX_INDEX_COUNT = 1 << 20


class BoundsViolation(ValueError):
    """MDL parameters (l, h) outside the admissible range."""


class ScenarioMismatch(ValueError):
    pass


class ZeroInputProbability(ValueError):
    pass


class SizeLimit(ValueError):
    pass


@dataclass(frozen=True)
class Scenario:
    parties: int
    inputs: tuple
    outputs: tuple

    def __post_init__(self):
        inputs = tuple(int(n) for n in self.inputs)
        outputs = tuple(tuple(int(m) for m in row) for row in self.outputs)
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "outputs", outputs)
        if self.parties < 1:
            raise ValueError("need at least one party")
        if len(inputs) != self.parties or len(outputs) != self.parties:
            raise ValueError("inputs/outputs must have one entry per party")
        for n, row in zip(inputs, outputs):
            if n < 1 or len(row) != n:
                raise ValueError("each party needs n_i >= 1 inputs with one outcome count each")
            if any(m < 1 for m in row):
                raise ValueError("outcome counts must be positive")
        count = 0
        for x in itertools.product(*(range(n) for n in inputs)):
            count += math.prod(outputs[i][xi] for i, xi in enumerate(x))
            if count > MAX_INDEX_COUNT:
                raise SizeLimit(f"scenario has more than {MAX_INDEX_COUNT} entries")

    @classmethod
    def uniform(cls, parties: int, inputs: int, outputs: int) -> "Scenario":
        """The (N, n, m) shorthand."""
        return cls(parties, (inputs,) * parties, ((outputs,) * inputs,) * parties)

    @classmethod
    def parse(cls, text: str) -> "Scenario":
        n, k, m = (int(t) for t in text.split(","))
        return cls.uniform(n, k, m)

    @cached_property
    def contexts(self) -> tuple:
        """All input tuples in canonical order."""
        return tuple(itertools.product(*(range(n) for n in self.inputs)))

    @cached_property
    def _offsets(self) -> dict:
        offsets = {}
        pos = 0
        for x in self.contexts:
            offsets[x] = pos
            pos += self.block_size(x)
        return offsets

    def block_size(self, x: Sequence[int]) -> int:
        return math.prod(self.outputs[i][xi] for i, xi in enumerate(x))

    def outcomes(self, x: Sequence[int]) -> tuple:
        return tuple(itertools.product(*(range(self.outputs[i][xi]) for i, xi in enumerate(x))))

    @cached_property
    def size(self) -> int:
        return sum(self.block_size(x) for x in self.contexts)

    @property
    def n_contexts(self) -> int:
        return len(self.contexts)

    @cached_property
    def entries(self) -> tuple:
        """(a, x) pairs in canonical index order."""
        return tuple((a, x) for x in self.contexts for a in self.outcomes(x))

    def index(self, a: Sequence[int], x: Sequence[int]) -> int:
        return canonical_index(self, a, x)

    def context_index(self, x: Sequence[int]) -> int:
        idx = 0
        for i, xi in enumerate(x):
            idx = idx * self.inputs[i] + xi
        return idx

    def to_dict(self) -> dict:
        return {"parties": self.parties, "inputs": list(self.inputs),
                "outputs": [list(r) for r in self.outputs]}

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        return cls(int(d["parties"]), tuple(d["inputs"]), tuple(tuple(r) for r in d["outputs"]))

    def __str__(self):
        if len(set(self.inputs)) == 1 and len({m for r in self.outputs for m in r}) == 1:
            return f"({self.parties},{self.inputs[0]},{self.outputs[0][0]})"
        return f"Scenario({self.parties}, {self.inputs}, {self.outputs})"


def canonical_index(scenario: Scenario, a: Sequence[int], x: Sequence[int]) -> int:
    if len(a) != scenario.parties or len(x) != scenario.parties:
        raise IndexError("outcome/input tuple length does not match party count")
    x = tuple(x)
    for i, xi in enumerate(x):
        if not 0 <= xi < scenario.inputs[i]:
            raise IndexError(f"input {xi} out of range for party {i}")
    pos = 0
    for i, ai in enumerate(a):
        m = scenario.outputs[i][x[i]]
        if not 0 <= ai < m:
            raise IndexError(f"outcome {ai} out of range for party {i} with input {x[i]}")
        pos = pos * m + ai
    return scenario._offsets[x] + pos


def index_to_entry(scenario: Scenario, index: int) -> tuple:
    """Inverse of :func:`canonical_index`."""
    if not 0 <= index < scenario.size:
        raise IndexError(f"index {index} out of range")
    return scenario.entries[index]


def _check_scenario(a: Scenario, b: Scenario):
    if a != b:
        raise ScenarioMismatch(f"scenario {a} does not match {b}")


@dataclass(frozen=True)
class JointBehavior:
    scenario: Scenario
    values: tuple

    def __post_init__(self):
        vals = as_vector(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.scenario.size:
            raise ValueError(f"expected {self.scenario.size} entries, got {len(vals)}")
        if any(v < 0 for v in vals):
            raise ValueError("joint behavior has a negative entry")
        if sum(vals) != 1:
            raise ValueError(f"joint behavior sums to {sum(vals)}, not 1")

    def input_marginals(self) -> tuple:
        sc = self.scenario
        out = []
        for x in sc.contexts:
            start = sc._offsets[x]
            out.append(sum(self.values[start:start + sc.block_size(x)], Fraction(0)))
        return tuple(out)


@dataclass(frozen=True)
class ConditionalBehavior:
    scenario: Scenario
    values: tuple

    def __post_init__(self):
        vals = as_vector(self.values)
        object.__setattr__(self, "values", vals)
        sc = self.scenario
        if len(vals) != sc.size:
            raise ValueError(f"expected {sc.size} entries, got {len(vals)}")
        if any(v < 0 for v in vals):
            raise ValueError("conditional behavior has a negative entry")
        for x in sc.contexts:
            start = sc._offsets[x]
            if sum(vals[start:start + sc.block_size(x)]) != 1:
                raise ValueError(f"p(.|{x}) does not sum to 1")


@dataclass(frozen=True)
class InputDistribution:
    scenario: Scenario
    values: tuple

    def __post_init__(self):
        vals = as_vector(self.values)
        object.__setattr__(self, "values", vals)
        if len(vals) != self.scenario.n_contexts:
            raise ValueError(f"expected {self.scenario.n_contexts} input probabilities")
        if any(v < 0 for v in vals) or sum(vals) != 1:
            raise ValueError("input distribution must be nonnegative and sum to 1")

    @classmethod
    def uniform(cls, scenario: Scenario) -> "InputDistribution":
        n = scenario.n_contexts
        return cls(scenario, (Fraction(1, n),) * n)


@dataclass(frozen=True)
class MdlParams:
    l: Fraction
    h: Fraction

    def __post_init__(self):
        object.__setattr__(self, "l", Fraction(self.l))
        object.__setattr__(self, "h", Fraction(self.h))


@dataclass(frozen=True)
class PartyBounds:
    bounds: tuple = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "bounds",
                           tuple((Fraction(l), Fraction(h)) for l, h in self.bounds))

    @classmethod
    def binary(cls, *h_values) -> "PartyBounds":
        return cls(tuple((1 - Fraction(h), Fraction(h)) for h in h_values))

    def validate(self, scenario: Scenario) -> "PartyBounds":
        if len(self.bounds) != scenario.parties:
            raise BoundsViolation("need one (l_i, h_i) pair per party")
        for i, ((l, h), n) in enumerate(zip(self.bounds, scenario.inputs)):
            if not (0 <= l <= Fraction(1, n) <= h <= 1):
                raise BoundsViolation(f"party {i}: need 0 <= l_i <= 1/n_i <= h_i <= 1")
            if n == 2 and l != 1 - h:
                raise BoundsViolation(f"party {i}: binary input requires l_i = 1 - h_i")
        return self


def validate_mdl_params(scenario: Scenario, l, h) -> MdlParams:
    """Check ``max(1-(K-1)h, 0) <= l <= 1/K <= h <= 1-(K-1)l`` with K input tuples."""
    l = parse_rational(l) if isinstance(l, str) else Fraction(l)
    h = parse_rational(h) if isinstance(h, str) else Fraction(h)
    k = scenario.n_contexts
    lower = max(1 - (k - 1) * h, Fraction(0))
    if l < lower:
        raise BoundsViolation(f"l = {l} is below max(1-(K-1)h, 0) = {lower}")
    if l > Fraction(1, k):
        raise BoundsViolation(f"l = {l} exceeds 1/K = 1/{k}")
    if h < Fraction(1, k):
        raise BoundsViolation(f"h = {h} is below 1/K = 1/{k}")
    if h > 1 - (k - 1) * l:
        raise BoundsViolation(f"h = {h} exceeds 1-(K-1)l = {1 - (k - 1) * l}")
    return MdlParams(l, h)


def conditional_to_joint(cond: ConditionalBehavior, inputs: InputDistribution) -> JointBehavior:
    _check_scenario(cond.scenario, inputs.scenario)
    sc = cond.scenario
    values = []
    for ci, x in enumerate(sc.contexts):
        px = inputs.values[ci]
        start = sc._offsets[x]
        values.extend(v * px for v in cond.values[start:start + sc.block_size(x)])
    return JointBehavior(sc, values)


def joint_to_conditional(joint: JointBehavior) -> ConditionalBehavior:
    sc = joint.scenario
    marg = joint.input_marginals()
    values = []
    for ci, x in enumerate(sc.contexts):
        if marg[ci] == 0:
            raise ZeroInputProbability(f"p(x={x}) = 0")
        start = sc._offsets[x]
        values.extend(v / marg[ci] for v in joint.values[start:start + sc.block_size(x)])
    return ConditionalBehavior(sc, values)


def signaling_residuals(joint: JointBehavior) -> list:
    """All differences ``p(a_j|x) - p(a_j|x')`` for contexts agreeing on party j.

    Returns ``(party, (a_j, x, x'), residual)`` triples, one per ordered pair
    ``x < x'``. The behavior is nonsignaling iff every residual is zero.
    """
    sc = joint.scenario
    marg = joint.input_marginals()
    for ci, x in enumerate(sc.contexts):
        if marg[ci] == 0:
            raise ZeroInputProbability(f"p(x={x}) = 0")
    local = {}
    for (a, x), v in zip(sc.entries, joint.values):
        ci = sc.context_index(x)
        for j in range(sc.parties):
            key = (j, a[j], x)
            local[key] = local.get(key, Fraction(0)) + v / marg[ci]
    out = []
    for j in range(sc.parties):
        for x, y in itertools.combinations(sc.contexts, 2):
            if x[j] != y[j]:
                continue
            for aj in range(sc.outputs[j][x[j]]):
                out.append((j, (aj, x, y), local[(j, aj, x)] - local[(j, aj, y)]))
    return out


def is_nonsignaling(joint: JointBehavior) -> bool:
    return all(r == 0 for _, _, r in signaling_residuals(joint))


def behavior_to_json(behavior) -> dict:
    kind = "joint" if isinstance(behavior, JointBehavior) else "conditional"
    return {"scenario": behavior.scenario.to_dict(), "kind": kind,
            "values": [format_rational(v) for v in behavior.values]}


def behavior_from_json(d: dict):
    sc = Scenario.from_dict(d["scenario"])
    values = [parse_rational(v) for v in d["values"]]
    if d.get("kind") == "joint":
        return JointBehavior(sc, values)
    if d.get("kind") == "conditional":
        return ConditionalBehavior(sc, values)
    raise ValueError(f"unknown behavior kind {d.get('kind')!r}")
