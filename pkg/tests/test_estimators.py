import math

import numpy as np
import pytest

from core.errors import ContractViolation
from core.mdp import TERMINAL_AVERSIVE, TERMINAL_GOAL, outcome_to, run_episode
from envs.nav import A_L, A_R, FrozenPolicy, NavEnv, shortest_path_policy
from explainers.estimator_support import (
    IntrospectionParams,
    estimated_distance,
    introspect,
    introspect_array,
    introspect_unclamped,
    memory_prob,
    p_update,
    success_flag,
)
from explainers.estimators import (
    EpisodicMemory,
    IntrospectionEstimator,
    LearningEstimator,
    PTable,
    build_estimators,
)

R1 = IntrospectionParams(terminal_reward=1.0, sigma=0.0, gamma=0.9)


# -----------------------------
# memory-based
# -----------------------------

def test_memory_prob_unvisited_reads_zero():
    assert memory_prob(0, 0) == 0.0
    assert memory_prob(3, 4) == 0.75
    np.testing.assert_array_equal(memory_prob(np.array([0, 1]), np.array([0, 2])), [0.0, 0.5])


def test_memory_counts_every_occurrence():
    mem = EpisodicMemory(2, 2)
    for s, a in [(0, 0), (1, 1), (0, 0)]:
        mem.record(s, a)
    mem.finalize(True)
    assert mem.t_success[0, 0] == 2 and mem.t_total[0, 0] == 2
    assert mem.prob(0, 0) == 1.0
    assert mem.t_list == []

    mem.record(0, 0)
    mem.finalize(False)
    assert mem.prob(0, 0) == pytest.approx(2 / 3)
    assert mem.prob(0, 1) == 0.0
    assert (mem.t_success <= mem.t_total).all()


def test_memory_storage_grows_with_steps():
    mem = EpisodicMemory(6, 3)
    assert mem.cells_allocated() == 36
    for _ in range(5):
        mem.record(0, 0)
    mem.finalize(False)
    assert mem.cells_allocated() == 36 + 10
    assert mem.t_list == []


# -----------------------------
# learning-based
# -----------------------------

def test_success_flag_only_on_goal():
    assert success_flag(outcome_to(TERMINAL_GOAL, 1.0)) == 1
    assert success_flag(outcome_to(TERMINAL_AVERSIVE, -1.0)) == 0
    assert success_flag(outcome_to(2, 0.0)) == 0


def test_p_update_rule():
    p = np.zeros((2, 2))
    assert p_update(p, 0, 0, 1, 0.0, alpha=0.3) == pytest.approx(0.3)
    p[1, 1] = 0.5
    assert p_update(p, 0, 1, 0, p[1, 1], alpha=0.3) == pytest.approx(0.15)
    with pytest.raises(ContractViolation):
        p_update(p, 0, 0, 0, math.inf, alpha=0.3)


def test_learning_estimator_step():
    est = LearningEstimator(6, 3, alpha=0.3)
    est.on_step(3, A_R, outcome_to(TERMINAL_GOAL, 1.0), None)
    assert est.p.values[3, A_R] == pytest.approx(0.3)
    est.on_step(1, A_L, outcome_to(TERMINAL_AVERSIVE, -1.0), None)
    assert est.p.values[1, A_L] == 0.0
    assert est.cells_allocated() == 18


def test_ptable_stays_in_unit_interval_under_random_updates():
    rng = np.random.default_rng(123)
    p = PTable(4, 3)
    n = 1_000_000
    s = rng.integers(4, size=n)
    a = rng.integers(3, size=n)
    s2 = rng.integers(4, size=n)
    a2 = rng.integers(3, size=n)
    terminal = rng.random(n) < 0.3
    goal = rng.random(n) < 0.5
    alpha = rng.uniform(0.01, 1.0, size=n)
    for i in range(n):
        if terminal[i]:
            p.update(int(s[i]), int(a[i]), int(goal[i]), TERMINAL_GOAL if goal[i] else TERMINAL_AVERSIVE, None,
                     alpha=float(alpha[i]))
        else:
            p.update(int(s[i]), int(a[i]), 0, int(s2[i]), int(a2[i]), alpha=float(alpha[i]))
    assert p.values.min() >= 0.0
    assert p.values.max() <= 1.0


def test_ptable_converges_on_path_with_scripted_policy():
    est = LearningEstimator(6, 3, alpha=0.3)
    policy = FrozenPolicy(shortest_path_policy(first=A_L))
    rng = np.random.default_rng(0)
    for _ in range(300):
        run_episode(NavEnv(0.0), policy, [est], rng, step_cap=50)
    for s, a in [(0, A_L), (1, A_R), (3, A_R)]:
        assert est.p.values[s, a] == pytest.approx(1.0, abs=0.02)


# -----------------------------
# introspection-based
# -----------------------------

@pytest.mark.parametrize("q, expected", [(1.0, 1.0), (0.1, 0.5), (0.01, 0.0), (0.0, 0.0), (-0.3, 0.0)])
def test_introspect_anchor_points(q, expected):
    assert introspect(q, R1) == expected


def test_introspect_is_monotone_in_q_and_sigma():
    qs = np.concatenate([[-1.0, 0.0], np.logspace(-5, 1, 400)])
    for sigma in (0.0, 0.1, 0.5):
        params = IntrospectionParams(terminal_reward=1.0, sigma=sigma, gamma=0.9)
        out = [introspect(float(q), params) for q in qs]
        assert (np.diff(out) >= 0.0).all()
    for q in (0.05, 0.3, 0.81, 1.0):
        by_sigma = [introspect(q, IntrospectionParams(sigma=s)) for s in np.linspace(0.0, 1.0, 21)]
        assert (np.diff(by_sigma) <= 0.0).all()


def test_introspect_clamps_above_one():
    assert introspect(2.0, R1) == 1.0


def test_distance_form_equals_log10_form():
    for q in np.logspace(-4, 0, 200):
        closed = 0.5 * math.log10(q) + 1.0
        assert abs(introspect_unclamped(float(q), R1) - closed) <= 1e-12


def test_estimated_distance_counts_actions():
    assert estimated_distance(0.81, 1.0, 0.9) == pytest.approx(2.0)
    with pytest.raises(ContractViolation):
        estimated_distance(0.0, 1.0, 0.9)


def test_stochastic_introspection_discount():
    params = IntrospectionParams(terminal_reward=1.0, sigma=0.1, gamma=0.9)
    assert introspect(0.81, params) == pytest.approx(0.9 * (0.5 * math.log10(0.81) + 1.0))


def test_introspect_array_matches_scalar():
    q = np.array([[1.0, 0.1, 0.0], [-1.0, 0.5, 0.02]])
    out = introspect_array(q, R1)
    expected = [[introspect(float(v), R1) for v in row] for row in q]
    np.testing.assert_allclose(out, expected, atol=1e-15)


def test_introspection_params_validate():
    with pytest.raises(ContractViolation):
        IntrospectionParams(terminal_reward=0.0)
    with pytest.raises(ContractViolation):
        IntrospectionParams(gamma=1.0)


def test_introspection_estimator_has_no_storage():
    est = IntrospectionEstimator(R1)
    assert est.cells_allocated() == 0
    np.testing.assert_allclose(est.readout(np.array([[1.0, 0.1]])), [[1.0, 0.5]])


def test_build_estimators_order_and_requirements():
    ests = build_estimators(
        ("introspection", "memory", "learning"), state_count=6, action_count=3, alpha=0.3, introspection=R1
    )
    assert [e.method for e in ests] == ["memory", "learning", "introspection"]
    with pytest.raises(ContractViolation):
        build_estimators(("introspection",), state_count=6, action_count=3, alpha=0.3, introspection=None)
