"""Limited detection: parameter mapping into MDL, postselection and sampling.

A lossy behavior lives on the scenario with one extra outcome per party and
input; the last outcome index stands for a nondetection event.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .polytope import input_vertices
from .rational import parse_rational
from .scenario import JointBehavior, MdlParams, Scenario

DYADIC_BITS = 20
DEFAULT_SEED = 0


class InvalidDetectionParams(ValueError):
    pass


class AllLost(ValueError):
    """Some input context has no probability of every party detecting."""


@dataclass(frozen=True)
class DetectionParams:
    eta_min: Fraction
    eta_max: Fraction

    def __post_init__(self):
        lo = parse_rational(self.eta_min) if isinstance(self.eta_min, str) else Fraction(self.eta_min)
        hi = parse_rational(self.eta_max) if isinstance(self.eta_max, str) else Fraction(self.eta_max)
        if not 0 < lo <= hi <= 1:
            raise InvalidDetectionParams(f"need 0 < eta_min <= eta_max <= 1, got {lo}, {hi}")
        object.__setattr__(self, "eta_min", lo)
        object.__setattr__(self, "eta_max", hi)


@dataclass(frozen=True)
class MappedParams:
    params: MdlParams
    clamped: bool  # h' was lowered to its ceiling 1 - (K-1) l'
    unclamped_h: Fraction


def map_params(params: MdlParams, det: DetectionParams, scenario: Scenario | None = None) -> MappedParams:
    """``l' = l (eta_min/eta_max)^2``, ``h' = h (eta_max/eta_min)^2``.

    ``h'`` above ``1 - (K-1) l'`` (K input tuples, default (2,2,2)) is clamped
    to that ceiling; MDL(l', h') does not change and ``clamped`` is set.
    """
    if not isinstance(det, DetectionParams):
        raise InvalidDetectionParams("expected DetectionParams")
    k = (scenario or Scenario.uniform(2, 2, 2)).n_contexts
    r = (det.eta_min / det.eta_max) ** 2
    l = Fraction(params.l) * r
    h = Fraction(params.h) / r
    ceiling = 1 - (k - 1) * l
    if h > ceiling:
        return MappedParams(MdlParams(l, ceiling), True, h)
    return MappedParams(MdlParams(l, h), False, h)


def lossy_scenario(scenario: Scenario) -> Scenario:
    return Scenario(scenario.parties, scenario.inputs,
                    tuple(tuple(m + 1 for m in row) for row in scenario.outputs))


@dataclass(frozen=True)
class LossyBehavior:
    behavior: JointBehavior  # on lossy_scenario(base)
    base: Scenario

    def __post_init__(self):
        if self.behavior.scenario != lossy_scenario(self.base):
            raise ValueError("lossy behavior must live on the scenario with a nondetection outcome")

    def is_lost(self, a, x) -> bool:
        return any(ai == self.base.outputs[i][xi] for i, (ai, xi) in enumerate(zip(a, x)))


def embed(joint: JointBehavior) -> LossyBehavior:
    """The same behavior with zero nondetection mass."""
    base = joint.scenario
    big = lossy_scenario(base)
    values = [Fraction(0)] * big.size
    for (a, x), v in zip(base.entries, joint.values):
        values[big.index(a, x)] = v
    return LossyBehavior(JointBehavior(big, values), base)


def postselect(lossy: LossyBehavior) -> JointBehavior:
    """Condition on every party detecting, exactly."""
    base = lossy.base
    big = lossy.behavior.scenario
    vals = lossy.behavior.values
    kept = [vals[big.index(a, x)] for a, x in base.entries]
    for x in base.contexts:
        start = base._offsets[x]
        if not any(kept[start:start + base.block_size(x)]):
            raise AllLost(f"no detection mass in context {x}")
    total = sum(kept)
    return JointBehavior(base, [v / total for v in kept])


def _dyadic_simplex(rng, k: int, bits: int) -> list:
    """Random point of the k-simplex with denominators 2**bits."""
    den = 1 << bits
    cuts = sorted(int(c) for c in rng.integers(0, den + 1, size=k - 1))
    edges = [0] + cuts + [den]
    return [Fraction(edges[i + 1] - edges[i], den) for i in range(k)]


def _dyadic_unit(rng, bits: int) -> Fraction:
    return Fraction(int(rng.integers(0, (1 << bits) + 1)), 1 << bits)


def sample_ldl_behavior(seed: int, scenario: Scenario, params: MdlParams, det: DetectionParams,
                        lambda_count: int = 4, deterministic: bool = False,
                        bits: int = DYADIC_BITS) -> LossyBehavior:
    """Random finite mixture of limited-detection MDL strategies.

    Each hidden value gets a weight, an input distribution (a dyadic convex
    combination of the input-polytope vertices, or a single vertex when
    ``deterministic``) and, per party and input, a detection probability in
    ``[eta_min, eta_max]`` spread over the detected outcomes. With
    ``deterministic`` the detected outcome is a single random one.
    """
    rng = np.random.default_rng(seed)
    ivs = input_vertices(scenario, params).vertices
    big = lossy_scenario(scenario)
    rho = _dyadic_simplex(rng, lambda_count, bits)
    values = [Fraction(0)] * big.size
    for w in rho:
        if deterministic:
            q = ivs[int(rng.integers(len(ivs)))]
        else:
            mix = _dyadic_simplex(rng, len(ivs), bits)
            q = [sum(m * v[c] for m, v in zip(mix, ivs)) for c in range(scenario.n_contexts)]
        response = []  # response[i][x_i][a_i]
        for i in range(scenario.parties):
            per_input = []
            for xi in range(scenario.inputs[i]):
                m = scenario.outputs[i][xi]
                eta = det.eta_min + (det.eta_max - det.eta_min) * _dyadic_unit(rng, bits)
                if deterministic:
                    dist = [Fraction(0)] * m
                    dist[int(rng.integers(m))] = Fraction(1)
                else:
                    dist = _dyadic_simplex(rng, m, bits)
                per_input.append([eta * d for d in dist] + [1 - eta])
            response.append(per_input)
        for ci, x in enumerate(scenario.contexts):
            weight = w * q[ci]
            if not weight:
                continue
            for a in itertools.product(*(range(len(response[i][xi])) for i, xi in enumerate(x))):
                p = weight
                for i, (ai, xi) in enumerate(zip(a, x)):
                    p *= response[i][xi][ai]
                if p:
                    values[big.index(a, x)] += p
    return LossyBehavior(JointBehavior(big, values), scenario)


def check_sample(lossy: LossyBehavior, params: MdlParams, det: DetectionParams) -> bool:
    """Re-check the limited-detection constraints on a sampled behavior.

    Only the constraints visible in the mixture are testable: every input
    marginal lies in ``[l, h]`` and each party's detection rate in
    ``[eta_min, eta_max]`` given its input (these bounds hold per hidden
    value, hence also on average).
    """
    base = lossy.base
    marg = lossy.behavior.input_marginals()
    if any(not params.l <= m <= params.h for m in marg):
        return False
    big = lossy.behavior.scenario
    for i in range(base.parties):
        for xi in range(base.inputs[i]):
            mass = Fraction(0)
            detected = Fraction(0)
            for (a, x), v in zip(big.entries, lossy.behavior.values):
                if x[i] != xi:
                    continue
                mass += v
                if a[i] != base.outputs[i][xi]:
                    detected += v
            if mass and not det.eta_min <= detected / mass <= det.eta_max:
                return False
    return True
