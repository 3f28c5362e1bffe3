"""Qubit states, projective measurements, Born-rule behaviors and violation searches.

Amplitude index ``s_1 ... s_N`` has party 1 most significant, so ``|01>`` is
party 1 in ``|0>`` and party 2 in ``|1>``. Probability arrays come out in the
canonical behavior order (inputs outermost, then outcomes, party 1 first).
"""
from __future__ import annotations

import string
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .inequalities import CONDITIONAL, JOINT, Inequality, SpaceMismatch
from .scenario import (ConditionalBehavior, InputDistribution, JointBehavior, Scenario,
                       conditional_to_joint, signaling_residuals)

NORM_TOL = 1e-12
MAX_QUBITS = 10
DEFAULT_SEED = 0


class DimensionMismatch(ValueError):
    pass


def _fix_phase(amps: np.ndarray) -> np.ndarray:
    nz = np.flatnonzero(np.abs(amps) > NORM_TOL)
    if len(nz):
        first = amps[nz[0]]
        amps = amps * (abs(first) / first)
    return amps


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state of ``parties`` qubits, global phase fixed."""
    amplitudes: np.ndarray
    parties: int = 0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).ravel()
        n = self.parties or int(round(np.log2(len(amps)))) if len(amps) else 0
        if n < 1 or len(amps) != 2 ** n:
            raise DimensionMismatch(f"{len(amps)} amplitudes do not describe {n} qubits")
        if n > MAX_QUBITS:
            raise DimensionMismatch(f"at most {MAX_QUBITS} qubits are supported")
        norm = np.linalg.norm(amps)
        if norm < NORM_TOL:
            raise ValueError("zero state vector")
        amps = _fix_phase(amps / norm)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "parties", n)

    def to_json(self) -> dict:
        return {"parties": self.parties,
                "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes]}

    @classmethod
    def from_json(cls, d: dict) -> "StateVector":
        amps = [complex(re, im) for re, im in d["amplitudes"]]
        return cls(np.array(amps), d.get("parties", 0))


def _check_basis(basis: np.ndarray):
    if basis.shape != (2, 2):
        raise DimensionMismatch(f"a qubit basis is 2 x 2, got {basis.shape}")
    gram = basis.conj() @ basis.T
    if np.max(np.abs(gram - np.eye(2))) > NORM_TOL:
        raise ValueError("measurement basis is not orthonormal")


@dataclass(frozen=True, eq=False)
class MeasurementSet:
    """``bases[i][x]`` is a 2 x 2 array whose row ``a`` is the outcome-``a`` vector."""
    bases: tuple

    def __post_init__(self):
        bases = tuple(tuple(np.asarray(b, dtype=complex) for b in party) for party in self.bases)
        for party in bases:
            if not party:
                raise DimensionMismatch("every party needs at least one input")
            for b in party:
                _check_basis(b)
        object.__setattr__(self, "bases", bases)

    @property
    def parties(self) -> int:
        return len(self.bases)

    def scenario(self) -> Scenario:
        return Scenario(len(self.bases), tuple(len(p) for p in self.bases),
                        tuple((2,) * len(p) for p in self.bases))

    def to_json(self) -> dict:
        return {"bases": [[[[[float(z.real), float(z.imag)] for z in row] for row in b]
                           for b in party] for party in self.bases]}

    @classmethod
    def from_json(cls, d: dict) -> "MeasurementSet":
        bases = [[np.array([[complex(re, im) for re, im in row] for row in b]) for b in party]
                 for party in d["bases"]]
        return cls(tuple(tuple(p) for p in bases))


def basis_from_angles(theta: float, phi: float) -> np.ndarray:
    """Basis whose outcome-0 vector has Bloch angles (theta, phi)."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    e = np.exp(1j * phi)
    return np.array([[c, e * s], [-np.conj(e) * s, c]])


@dataclass(frozen=True, eq=False)
class AngleParametrization:
    """Bloch angles ``angles[i, x] = (theta, phi)`` for party i, input x."""
    angles: np.ndarray

    def __post_init__(self):
        a = np.array(self.angles, dtype=float)
        if a.ndim != 3 or a.shape[2] != 2:
            raise DimensionMismatch("angles must have shape (parties, inputs, 2)")
        theta = np.mod(a[..., 0], 2 * np.pi)
        phi = a[..., 1]
        # theta and 2 pi - theta with phi + pi give the same Bloch vector
        over = theta > np.pi
        theta = np.where(over, 2 * np.pi - theta, theta)
        phi = np.mod(np.where(over, phi + np.pi, phi), 2 * np.pi)
        object.__setattr__(self, "angles", np.stack([theta, phi], axis=-1))

    @classmethod
    def from_vector(cls, vec, parties: int, inputs: int) -> "AngleParametrization":
        return cls(np.asarray(vec, dtype=float).reshape(parties, inputs, 2))

    def measurements(self) -> MeasurementSet:
        return MeasurementSet(tuple(tuple(basis_from_angles(t, p) for t, p in party)
                                    for party in self.angles))

    def to_json(self) -> dict:
        return {"angles": self.angles.tolist()}


def _born_array(amps: np.ndarray, bases) -> np.ndarray:
    """Conditional probabilities in canonical order from raw arrays.

    ``bases[i]`` is an (inputs, 2, 2) array for party i.
    """
    n = len(bases)
    if n == 2:
        A, B = bases
        ma, mb = A.shape[0], B.shape[0]
        amp = A.conj().reshape(2 * ma, 2) @ amps.reshape(2, 2) @ B.conj().reshape(2 * mb, 2).T
        amp = amp.reshape(ma, 2, mb, 2).transpose(0, 2, 1, 3)
        return (amp.real ** 2 + amp.imag ** 2).ravel()
    letters = iter(string.ascii_letters)
    xs = [next(letters) for _ in range(n)]
    as_ = [next(letters) for _ in range(n)]
    ss = [next(letters) for _ in range(n)]
    subscripts = ",".join(x + a + s for x, a, s in zip(xs, as_, ss))
    subscripts += "," + "".join(ss) + "->" + "".join(xs) + "".join(as_)
    psi = amps.reshape((2,) * n)
    amp = np.einsum(subscripts, *[np.conj(b) for b in bases], psi)
    return (np.abs(amp) ** 2).ravel()


def born_probabilities(state: StateVector, meas: MeasurementSet) -> np.ndarray:
    """Float ``p(a|x)`` in canonical order."""
    if state.parties != meas.parties:
        raise DimensionMismatch(f"state has {state.parties} qubits, measurements {meas.parties} parties")
    return _born_array(state.amplitudes, [np.stack(p) for p in meas.bases])


def born_behavior(state: StateVector, meas: MeasurementSet, inputs="conditional",
                  exact: bool = False, max_denominator: int = 10 ** 9):
    """Born-rule behavior.

    With ``exact=False`` a float array (conditional, or joint when ``inputs``
    is an InputDistribution). With ``exact=True`` a ConditionalBehavior or
    JointBehavior built by :func:`rationalize`.
    """
    probs = born_probabilities(state, meas)
    sc = meas.scenario()
    if exact:
        cond = rationalize(probs, sc, max_denominator)
        if isinstance(inputs, InputDistribution):
            return conditional_to_joint(cond, inputs)
        return cond
    if isinstance(inputs, InputDistribution):
        return probs * _input_weights(sc, inputs)
    return probs


def _input_weights(sc: Scenario, inputs: InputDistribution) -> np.ndarray:
    if inputs.scenario != sc:
        raise DimensionMismatch("input distribution belongs to another scenario")
    return np.repeat([float(q) for q in inputs.values], [sc.block_size(x) for x in sc.contexts])


def rationalize(probs, scenario: Scenario, max_denominator: int = 10 ** 9,
                ns_tolerance: float = 1e-9) -> ConditionalBehavior:
    """Nearby exact conditional behavior.

    Each probability is rounded to a fraction with denominator at most
    ``max_denominator`` (negatives clamp to 0) and each context is rescaled to
    sum to 1 exactly. Raises ValueError if the result signals by more than
    ``ns_tolerance`` under uniform inputs.
    """
    probs = np.asarray(probs, dtype=float)
    if len(probs) != scenario.size:
        raise DimensionMismatch(f"expected {scenario.size} probabilities")
    vals = [Fraction(max(float(p), 0.0)).limit_denominator(max_denominator) for p in probs]
    out = []
    for x in scenario.contexts:
        start = scenario._offsets[x]
        block = vals[start:start + scenario.block_size(x)]
        total = sum(block)
        if total == 0:
            raise ValueError(f"context {x} has no probability mass")
        out.extend(v / total for v in block)
    cond = ConditionalBehavior(scenario, out)
    joint = conditional_to_joint(cond, InputDistribution.uniform(scenario))
    worst = max((abs(float(r)) for _, _, r in signaling_residuals(joint)), default=0.0)
    if worst > ns_tolerance:
        raise ValueError(f"rationalized behavior signals (residual {worst})")
    return cond


# -- models --------------------------------------------------------------------

_PLUS_MINUS = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
_COMPUTATIONAL = np.eye(2)


def hardy_model() -> tuple:
    """(|01> + |10> - |11>)/sqrt(3); input 0 measures +/-, input 1 measures 0/1."""
    state = StateVector(np.array([0, 1, 1, -1]) / np.sqrt(3))
    party = (_PLUS_MINUS, _COMPUTATIONAL)
    return state, MeasurementSet((party, party))


def psi_n_model(N: int) -> tuple:
    """Single excitations minus |1...1>, all parties measuring as in the Hardy model."""
    if N < 2:
        raise ValueError("psi_n_model needs N >= 2")
    if N > MAX_QUBITS:
        raise DimensionMismatch(f"N = {N} exceeds the cap of {MAX_QUBITS} qubits")
    amps = np.zeros(2 ** N)
    for j in range(N):
        amps[1 << j] = 1
    amps[-1] = -1
    state = StateVector(amps / np.sqrt(N + 1))
    party = (_PLUS_MINUS, _COMPUTATIONAL)
    return state, MeasurementSet((party,) * N)


def two_n_two_model(n: int) -> tuple:
    """Hardy state; input 0 as in the Hardy model, inputs 1..n-1 all measure 0/1."""
    if n < 2:
        raise ValueError("two_n_two_model needs n >= 2")
    state, _ = hardy_model()
    party = (_PLUS_MINUS,) + (_COMPUTATIONAL,) * (n - 1)
    return state, MeasurementSet((party, party))


def maximally_entangled() -> StateVector:
    return StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2))


def hardy_angles() -> np.ndarray:
    """Bloch angles reproducing the Hardy-model measurements, shape (2, 2, 2)."""
    party = [[np.pi / 2, 0.0], [0.0, 0.0]]
    return np.array([party, party])


# -- violation search ----------------------------------------------------------

@dataclass
class SearchResult:
    value: float
    angles: AngleParametrization
    state: StateVector
    evaluations: int
    restart: int  # index of the restart that found the best value
    restart_values: list = field(default_factory=list)

    def measurements(self) -> MeasurementSet:
        return self.angles.measurements()

    def to_json(self) -> dict:
        return {"value": self.value, "restart": self.restart, "evaluations": self.evaluations,
                "angles": self.angles.to_json()["angles"], "state": self.state.to_json()}


class _Objective:
    """Picklable inequality value as a function of the search vector.

    The vector holds the Bloch angles, followed by real and imaginary parts
    of the amplitudes when the state is free.
    """

    def __init__(self, ineq: Inequality, inputs, state: StateVector | None, parties: int, n_inputs: int):
        sc = ineq.scenario
        self.beta = np.array([float(b) for b in ineq.beta])
        if ineq.space == JOINT:
            if not isinstance(inputs, InputDistribution):
                raise SpaceMismatch("a joint-space inequality needs an input distribution")
            self.weights = _input_weights(sc, inputs)
        elif ineq.space == CONDITIONAL:
            self.weights = np.ones(sc.size)
        self.coef = self.beta * self.weights
        self.state = None if state is None else state.amplitudes
        self.parties = parties
        self.n_inputs = n_inputs
        self.n_angles = parties * n_inputs * 2

    def split(self, vec):
        angles = AngleParametrization.from_vector(vec[:self.n_angles], self.parties, self.n_inputs)
        if self.state is not None:
            return angles, StateVector(self.state)
        k = 2 ** self.parties
        amps = vec[self.n_angles:self.n_angles + k] + 1j * vec[self.n_angles + k:]
        return angles, StateVector(amps)

    def __call__(self, vec) -> float:
        vec = np.asarray(vec, dtype=float)
        ang = vec[:self.n_angles].reshape(self.parties, self.n_inputs, 2)
        c, s = np.cos(ang[..., 0] / 2), np.sin(ang[..., 0] / 2)
        e = np.exp(1j * ang[..., 1])
        # rows: outcome vectors of basis_from_angles
        bases = np.empty((self.parties, self.n_inputs, 2, 2), dtype=complex)
        bases[..., 0, 0] = c
        bases[..., 0, 1] = e * s
        bases[..., 1, 0] = -np.conj(e) * s
        bases[..., 1, 1] = c
        if self.state is None:
            k = 2 ** self.parties
            amps = vec[self.n_angles:self.n_angles + k] + 1j * vec[self.n_angles + k:]
            norm = np.linalg.norm(amps)
            if norm < NORM_TOL:
                return -np.inf
            amps = amps / norm
        else:
            amps = self.state
        return float(self.coef @ _born_array(amps, list(bases)))


def _run_restart(args):
    objective, x0, budget, xatol, fatol = args
    best = [objective(x0), np.array(x0, dtype=float)]
    evals = [1]

    def f(v):
        val = objective(v)
        evals[0] += 1
        if val > best[0]:
            best[0], best[1] = val, np.array(v, dtype=float)
        return -val

    if budget > 0:
        minimize(f, x0, method="Nelder-Mead",
                 options={"maxfev": budget, "xatol": xatol, "fatol": fatol, "adaptive": True})
    return best[0], best[1], evals[0]


def optimize_violation(ineq: Inequality, inputs: InputDistribution | None = None,
                       state: StateVector | None = None, restarts: int = 64, budget: int = 4000,
                       seed: int = DEFAULT_SEED, initial: Sequence | None = None,
                       initial_state: StateVector | None = None, workers: int = 1,
                       xatol: float = 1e-10, fatol: float = 1e-14) -> SearchResult:
    """Multi-restart Nelder-Mead search for the largest value of ``ineq``.

    ``state`` fixes the state; without it the amplitudes are searched too.
    Restart 0 starts from ``initial`` angles (and ``initial_state``) when
    given, the rest from angles drawn with per-restart seeds spawned from
    ``seed``. ``budget`` caps evaluations per restart; with ``budget=0`` each
    restart returns its starting value. The reported value is the best
    evaluated sample, so it never decreases as the budget grows.
    """
    sc = ineq.scenario
    if len(set(sc.inputs)) != 1 or any(o != (2,) * sc.inputs[0] for o in sc.outputs):
        raise DimensionMismatch("optimize_violation needs binary outcomes and equal input counts")
    parties, n_inputs = sc.parties, sc.inputs[0]
    if state is not None and state.parties != parties:
        raise DimensionMismatch("state size does not match the scenario")
    objective = _Objective(ineq, inputs, state, parties, n_inputs)
    k = 2 ** parties
    streams = np.random.SeedSequence(seed).spawn(max(restarts, 1))
    starts = []
    for r, ss in enumerate(streams):
        rng = np.random.default_rng(ss)
        ang = np.stack([np.arccos(rng.uniform(-1, 1, (parties, n_inputs))),
                        rng.uniform(0, 2 * np.pi, (parties, n_inputs))], axis=-1).ravel()
        amp = rng.normal(size=2 * k) if state is None else np.empty(0)
        if r == 0 and initial is not None:
            ang = np.asarray(initial, dtype=float).ravel()
            if state is None and initial_state is not None:
                amp = np.concatenate([initial_state.amplitudes.real, initial_state.amplitudes.imag])
        starts.append(np.concatenate([ang, amp]))
    jobs = [(objective, x0, budget, xatol, fatol) for x0 in starts]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_restart, jobs))
    else:
        results = [_run_restart(j) for j in jobs]
    values = [r[0] for r in results]
    # ties go to the lowest restart index
    best = int(np.argmax(values))
    angles, st = objective.split(results[best][1])
    return SearchResult(values[best], angles, st, sum(r[2] for r in results), best, values)


@dataclass
class ScanEntry:
    l: Fraction
    h: Fraction
    best_value: float
    best_row: int  # table label of the best family representative
    violation: bool
    row_values: dict

    def to_json(self) -> dict:
        return {"l": str(self.l), "h": str(self.h), "best_value": self.best_value,
                "best_row": self.best_row, "violation": self.violation,
                "row_values": {str(k): v for k, v in self.row_values.items()}}


def maximally_entangled_scan(l_grid: Sequence, restarts: int = 64, budget: int = 1500,
                             seed: int = DEFAULT_SEED, tolerance: float = 1e-8,
                             workers: int = 1, progress: Callable | None = None) -> list:
    """Largest value of each B1 facet family on the maximally entangled state.

    For each ``l`` (with ``h = 1 - 3 l``) every table row is oriented against
    the MDL vertices, then optimized over measurement angles with uniform
    inputs. A value above ``tolerance`` counts as a violation.
    """
    from .facet_tables.tables import load_table, verify_table
    from .polytope import mdl_vertices
    from .scenario import MdlParams

    table = load_table("B1")
    sc = Scenario.uniform(2, 2, 2)
    uniform = InputDistribution.uniform(sc)
    me = maximally_entangled()
    out = []
    for l in l_grid:
        l = Fraction(l)
        h = 1 - 3 * l
        verts = mdl_vertices(sc, MdlParams(l, h))
        report = verify_table(table, {"l": l}, verts, allow_boundary=True)
        values = {}
        for row in report.rows:
            if row.inequality is None or not row.report.valid:
                continue
            res = optimize_violation(row.inequality, uniform, me, restarts, budget,
                                     seed=seed, workers=workers)
            values[row.label] = res.value
            if progress:
                progress(l, row.label, res.value)
        label = max(values, key=lambda k: (values[k], -k))
        out.append(ScanEntry(l, h, values[label], label, values[label] > tolerance, values))
    return out
