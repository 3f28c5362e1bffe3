import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mdlpoly.inequalities import chsh_joint, eberhard, evaluate_float, golden, n_party_bell, two_n_two
from mdlpoly.quantum import (AngleParametrization, DimensionMismatch, MeasurementSet, StateVector,
                             basis_from_angles, born_behavior, born_probabilities, hardy_angles,
                             hardy_model, maximally_entangled, maximally_entangled_scan,
                             optimize_violation, psi_n_model, rationalize, two_n_two_model)
from mdlpoly.scenario import (ConditionalBehavior, InputDistribution, JointBehavior, Scenario,
                              signaling_residuals)

F = Fraction
angle = st.floats(0, 2 * np.pi, allow_nan=False)


def kron_oracle(amps, bases, sc):
    """p(a|x) from explicit Kronecker products of projectors."""
    out = []
    for a, x in sc.entries:
        vec = np.array([1.0 + 0j])
        for i, (ai, xi) in enumerate(zip(a, x)):
            vec = np.kron(vec, bases[i][xi][ai])
        out.append(abs(np.vdot(vec, amps)) ** 2)
    return np.array(out)


def test_hardy_behavior(sc222):
    state, meas = hardy_model()
    p = born_probabilities(state, meas)
    assert abs(p[sc222.index((0, 0), (0, 0))] - 1 / 12) < 1e-10
    for a, x in [((0, 1), (0, 1)), ((1, 0), (1, 0)), ((0, 0), (1, 1))]:
        assert abs(p[sc222.index(a, x)]) < 1e-10
    # <++|psi> = 1/(2 sqrt 3)
    plus = np.array([1, 1]) / np.sqrt(2)
    assert abs(np.vdot(np.kron(plus, plus), state.amplitudes) - 1 / (2 * np.sqrt(3))) < 1e-12
    assert np.allclose(p, kron_oracle(state.amplitudes, meas.bases, sc222), atol=1e-14)


def test_hardy_inequality_values(sc222):
    state, meas = hardy_model()
    cond = born_behavior(state, meas)
    assert abs(evaluate_float(eberhard(), cond) - 1 / 12) < 1e-10
    joint = born_behavior(state, meas, InputDistribution.uniform(sc222))
    for l in (1e-1, 1e-3, 1e-6):
        lq = F(l).limit_denominator(10 ** 7)
        v = evaluate_float(golden(lq, 1 - 3 * lq), joint)
        assert abs(v - float(lq) / 48) < 1e-10 and v > 0


def test_product_state_deterministic(sc222):
    state = StateVector(np.array([1, 0, 0, 0]))
    comp = (np.eye(2), np.eye(2))
    p = born_probabilities(state, MeasurementSet((comp, comp)))
    for x in sc222.contexts:
        assert p[sc222.index((0, 0), x)] == pytest.approx(1, abs=1e-12)


def test_maximally_entangled_same_basis(sc222):
    comp = (np.eye(2), np.eye(2))
    p = born_probabilities(maximally_entangled(), MeasurementSet((comp, comp)))
    for x in [(0, 0), (1, 1)]:
        assert abs(p[sc222.index((0, 1), x)]) < 1e-10 and abs(p[sc222.index((1, 0), x)]) < 1e-10


def bloch(theta, phi):
    return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])


@given(st.lists(angle, min_size=8, max_size=8))
def test_maximally_entangled_closed_form(vals):
    ang = np.array(vals).reshape(2, 2, 2)
    meas = AngleParametrization(ang).measurements()
    p = born_probabilities(maximally_entangled(), meas)
    sc = Scenario.uniform(2, 2, 2)
    for k, (a, x) in enumerate(sc.entries):
        u = bloch(*ang[0, x[0]])
        v = bloch(*ang[1, x[1]])
        corr = u[0] * v[0] - u[1] * v[1] + u[2] * v[2]
        s = (1 - 2 * a[0]) * (1 - 2 * a[1])
        assert abs(p[k] - (1 + s * corr) / 4) < 1e-12


@settings(max_examples=15)
@given(st.lists(st.floats(-1, 1), min_size=16, max_size=16).filter(lambda v: np.linalg.norm(v) > 1e-3),
       st.lists(angle, min_size=12, max_size=12))
def test_born_rule_properties(raw, vals):
    amps = np.array(raw[:8]) + 1j * np.array(raw[8:])
    state = StateVector(amps)
    meas = AngleParametrization(np.array(vals).reshape(3, 2, 2)).measurements()
    sc = meas.scenario()
    p = born_probabilities(state, meas)
    assert np.all(p >= -1e-12) and np.all(p <= 1 + 1e-12)
    for x in sc.contexts:
        start = sc.index((0,) * 3, x)
        assert abs(p[start:start + 8].sum() - 1) < 1e-10
    assert np.allclose(p, kron_oracle(state.amplitudes, meas.bases, sc), atol=1e-12)
    cond = rationalize(p, sc)
    joint = JointBehavior(sc, [v / 8 for v in cond.values])
    assert max(abs(float(r)) for _, _, r in signaling_residuals(joint)) <= 1e-9


def test_psi_n_values():
    for N, expected in [(2, 1 / 12), (3, 1 / 8), (4, 9 / 80)]:
        state, meas = psi_n_model(N)
        assert abs(evaluate_float(n_party_bell(N), born_behavior(state, meas)) - expected) < 1e-10
    state, meas = psi_n_model(3)
    sc = meas.scenario()
    assert np.allclose(born_probabilities(state, meas), kron_oracle(state.amplitudes, meas.bases, sc))
    with pytest.raises(DimensionMismatch):
        psi_n_model(11)
    with pytest.raises(ValueError):
        psi_n_model(1)


def test_two_n_two_model():
    state, meas = two_n_two_model(3)
    sc = meas.scenario()
    u = InputDistribution.uniform(sc)
    joint = born_behavior(state, meas, u)
    assert abs(evaluate_float(two_n_two(3, F(1, 8)), joint) - 1 / 864) < 1e-10
    assert abs(evaluate_float(two_n_two(3, F(1, 7)), joint)) < 1e-12
    s2, m2 = two_n_two_model(2)
    j2 = born_behavior(s2, m2, InputDistribution.uniform(m2.scenario()))
    h = F(3, 10)
    assert evaluate_float(two_n_two(2, h), j2) == pytest.approx(evaluate_float(golden(1 - 3 * h, h), j2), abs=1e-15)


def test_state_vector_contract():
    s = StateVector(np.array([0, -2j, 0, 0]))
    assert abs(np.linalg.norm(s.amplitudes) - 1) < 1e-12
    assert s.amplitudes[1] == pytest.approx(1)
    again = StateVector.from_json(s.to_json())
    assert np.allclose(again.amplitudes, s.amplitudes) and again.parties == 2
    with pytest.raises(DimensionMismatch):
        StateVector(np.ones(3))
    with pytest.raises(DimensionMismatch):
        StateVector(np.ones(2 ** 11))
    with pytest.raises(ValueError):
        StateVector(np.zeros(4))


def test_measurement_set_contract():
    with pytest.raises(ValueError):
        MeasurementSet(((np.array([[1, 0], [1, 0]]),),))
    with pytest.raises(DimensionMismatch):
        MeasurementSet(((np.eye(3),),))
    _, meas = hardy_model()
    again = MeasurementSet.from_json(meas.to_json())
    assert all(np.allclose(a, b) for pa, pb in zip(again.bases, meas.bases) for a, b in zip(pa, pb))
    state = maximally_entangled()
    with pytest.raises(DimensionMismatch):
        born_probabilities(StateVector(np.ones(8)), meas)
    assert born_probabilities(state, meas).shape == (16,)


@given(st.floats(-20, 20), st.floats(-20, 20))
def test_angle_normalisation(theta, phi):
    ap = AngleParametrization(np.array([[[theta, phi]]]))
    t, p = ap.angles[0, 0]
    assert 0 <= t <= np.pi and 0 <= p < 2 * np.pi + 1e-12
    assert np.allclose(bloch(t, p), bloch(theta, phi), atol=1e-9)


def test_hardy_angles_reproduce_model():
    state, meas = hardy_model()
    p = born_probabilities(state, meas)
    q = born_probabilities(state, AngleParametrization(hardy_angles()).measurements())
    assert np.allclose(p, q, atol=1e-12)


def test_rationalize_rejects_signaling(sc222):
    p = np.full(16, 0.25)
    p[:4] = [0.5, 0.5, 0, 0]
    with pytest.raises(ValueError):
        rationalize(p, sc222)
    cond = born_behavior(*hardy_model(), exact=True)
    assert isinstance(cond, ConditionalBehavior)
    assert cond.values[0] == F(1, 12)


def test_optimizer_zero_budget_returns_seed(sc222):
    u = InputDistribution.uniform(sc222)
    g = golden(F(1, 10), F(7, 10))
    res = optimize_violation(g, u, restarts=1, budget=0, initial=hardy_angles(),
                             initial_state=hardy_model()[0])
    assert abs(res.value - 1 / 480) < 1e-12 and res.evaluations == 1


def test_optimizer_deterministic_and_monotone(sc222):
    u = InputDistribution.uniform(sc222)
    g = golden(F(1, 10), F(7, 10))
    runs = [optimize_violation(g, u, restarts=3, budget=b, seed=7).value for b in (0, 50, 200, 800)]
    assert runs == sorted(runs)
    again = optimize_violation(g, u, restarts=3, budget=200, seed=7)
    assert again.value == runs[2]
    other = optimize_violation(g, u, restarts=3, budget=200, seed=8)
    assert other.restart_values != again.restart_values


def test_optimizer_golden_at_least_analytic(sc222):
    u = InputDistribution.uniform(sc222)
    g = golden(F(1, 10), F(7, 10))
    res = optimize_violation(g, u, restarts=4, budget=1000, initial=hardy_angles(),
                             initial_state=hardy_model()[0])
    assert res.value >= 1 / 480 - 1e-12
    assert abs(evaluate_float(g, born_behavior(res.state, res.measurements(), u)) - res.value) < 1e-12


def test_optimizer_parallel_matches_serial(sc222):
    u = InputDistribution.uniform(sc222)
    serial = optimize_violation(chsh_joint(), u, maximally_entangled(), restarts=2, budget=100)
    parallel = optimize_violation(chsh_joint(), u, maximally_entangled(), restarts=2, budget=100, workers=2)
    assert serial.restart_values == parallel.restart_values


def test_scan_smoke():
    entries = maximally_entangled_scan([F(1, 4), F(6, 25)], restarts=2, budget=300)
    assert all(e.violation for e in entries)
    assert len(entries[0].row_values) == 74
    assert entries[0].best_value > 0.2
