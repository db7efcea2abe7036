import math

import numpy as np
import pytest

from core.errors import ContractViolation
from core.config import default_config
from core.experiment import run_experiment
from core.mdp import TERMINAL_GOAL, Episode, outcome_to
from envs.nav import A_L, A_R
from learning.learner import (
    QTable,
    SarsaAgent,
    SelectionPolicy,
    epsilon_greedy_select,
    sample_index,
    sarsa_update,
    softmax_probabilities,
    softmax_select,
)


def test_sarsa_update_terminal_target():
    q = QTable(2, 2)
    assert sarsa_update(q, 0, 1, 1.0, TERMINAL_GOAL, None, alpha=0.3, gamma=0.9) == pytest.approx(0.3)
    assert sarsa_update(q, 0, 1, 1.0, TERMINAL_GOAL, None, alpha=0.3, gamma=0.9) == pytest.approx(0.51)
    # only the updated cell changes
    assert q.values[0, 0] == 0.0 and q.values[1].sum() == 0.0


def test_sarsa_update_bootstraps_next_pair():
    q = QTable(2, 2)
    q.values[1, 0] = 1.0
    assert sarsa_update(q, 0, 0, 0.0, 1, 0, alpha=0.3, gamma=0.9) == pytest.approx(0.27)


def test_sarsa_update_rejects_bad_inputs():
    q = QTable(2, 2)
    with pytest.raises(ContractViolation):
        sarsa_update(q, 0, 0, math.nan, 1, 0, alpha=0.3, gamma=0.9)
    with pytest.raises(ContractViolation):
        sarsa_update(q, 5, 0, 0.0, 1, 0, alpha=0.3, gamma=0.9)
    with pytest.raises(ContractViolation):
        QTable(2, 2, values=np.full((2, 2), np.inf))


def test_softmax_probabilities():
    p = softmax_probabilities(np.array([0.0, 0.0, 0.0]), 0.25)
    np.testing.assert_allclose(p, [1 / 3] * 3)
    p = softmax_probabilities(np.array([0.0, 0.25]), 0.25)
    assert p[1] == pytest.approx(math.e / (1 + math.e))
    p = softmax_probabilities(np.array([1000.0, 0.0]), 0.01)
    assert np.isfinite(p).all() and p[0] == pytest.approx(1.0)
    with pytest.raises(ContractViolation):
        softmax_probabilities(np.array([0.0]), 0.0)


def test_softmax_select_frequencies():
    q = QTable(1, 2, values=np.array([[0.0, 0.25]]))
    rng = np.random.default_rng(9)
    picks = np.array([softmax_select(q, 0, 0.25, rng) for _ in range(20000)])
    assert picks.mean() == pytest.approx(math.e / (1 + math.e), abs=0.015)


def test_sample_index_uses_one_draw():
    a, b = np.random.default_rng(1), np.random.default_rng(1)
    sample_index(np.array([0.2, 0.3, 0.5]), a)
    b.random()
    assert a.random() == b.random()


def test_epsilon_greedy_ties_go_to_lowest_index():
    q = QTable(1, 3, values=np.array([[1.0, 1.0, 0.0]]))
    rng = np.random.default_rng(0)
    assert all(epsilon_greedy_select(q, 0, 0.0, rng) == 0 for _ in range(20))
    picks = {epsilon_greedy_select(q, 0, 1.0, rng) for _ in range(200)}
    assert picks == {0, 1, 2}


def test_epsilon_decays_to_floor():
    policy = SelectionPolicy(kind="epsilon_greedy", epsilon=1.0, epsilon_decay=0.5, epsilon_min=0.1)
    agent = SarsaAgent(2, 2, policy=policy, alpha=0.3, gamma=0.9)
    for _ in range(10):
        agent.on_episode_end(Episode())
    assert agent.epsilon == 0.1


def test_agent_on_step_updates_q():
    agent = SarsaAgent(2, 2, policy=SelectionPolicy(), alpha=0.5, gamma=0.9)
    agent.on_step(0, 1, outcome_to(TERMINAL_GOAL, 1.0), None)
    assert agent.q.get(0, 1) == pytest.approx(0.5)
    assert agent.q.greedy_action(0) == 1


def test_qtable_frame():
    q = QTable(2, 3)
    df = q.to_frame(["s0", "s1"], ["a_L", "a_R", "a_S"])
    assert list(df.columns) == ["a_L", "a_R", "a_S"]
    assert df.index.name == "state"


def test_selection_policy_validates():
    with pytest.raises(ContractViolation):
        SelectionPolicy(kind="ucb")


def test_sarsa_update_worked_example_and_zero_alpha():
    q = QTable(2, 2)
    q.values[0, 0] = 0.5
    q.values[1, 1] = 0.6
    assert sarsa_update(q, 0, 0, 0.0, 1, 1, alpha=0.3, gamma=0.9) == pytest.approx(0.512)

    before = q.snapshot()
    sarsa_update(q, 0, 0, 1.0, 1, 1, alpha=0.0, gamma=0.9)
    np.testing.assert_array_equal(q.values, before)


def test_softmax_closed_form_and_shift_invariance():
    p = softmax_probabilities(np.array([1.0, 0.0, 0.0]), 0.25)
    assert p[0] == pytest.approx(math.exp(4) / (math.exp(4) + 2), abs=1e-4)
    assert p[0] == pytest.approx(0.9647, abs=1e-4)

    row = np.array([0.3, -0.2, 0.7])
    np.testing.assert_allclose(softmax_probabilities(row + 5.0, 0.25), softmax_probabilities(row, 0.25))

    rng_a, rng_b = np.random.default_rng(4), np.random.default_rng(4)
    shifted = QTable(1, 3, values=(row + 5.0)[None, :])
    plain = QTable(1, 3, values=row[None, :])
    a = np.bincount([softmax_select(plain, 0, 0.25, rng_a) for _ in range(20000)], minlength=3) / 20000
    b = np.bincount([softmax_select(shifted, 0, 0.25, rng_b) for _ in range(20000)], minlength=3) / 20000
    np.testing.assert_allclose(a, b, atol=0.015)


def test_softmax_near_zero_temperature_is_greedy():
    p = softmax_probabilities(np.array([0.5, 0.4, 0.1]), 1e-6)
    assert p[0] > 0.999


def test_epsilon_greedy_argmax_frequency():
    q = QTable(1, 4, values=np.array([[0.0, 1.0, 0.2, 0.3]]))
    rng = np.random.default_rng(21)
    picks = np.array([epsilon_greedy_select(q, 0, 0.5, rng) for _ in range(40000)])
    assert (picks == 1).mean() == pytest.approx(0.625, abs=0.01)


# on-path successor and remaining actions to the goal, per (room, action)
OPTIMAL_PATH = {(0, A_L): (1, 2), (0, A_R): (2, 2), (1, A_R): (3, 1), (2, A_L): (4, 1), (3, A_R): (None, 0), (4, A_L): (None, 0)}


def test_converged_on_path_q_is_discounted_terminal_reward():
    # greedy in the limit, so on-path Q converges to gamma ** remaining_steps
    cfg = default_config(
        "nav", selection="epsilon_greedy", epsilon_decay=0.97, epsilon_min=0.0, agents=5, episodes=300, seed=3
    )
    for run in run_experiment(cfg, threads=1):
        s = 0
        while s is not None:
            a = int(np.argmax(run.final_q[s]))
            assert (s, a) in OPTIMAL_PATH, (s, run.final_q[s])
            s_next, n = OPTIMAL_PATH[(s, a)]
            assert run.final_q[s, a] == pytest.approx(cfg.terminal_reward * cfg.gamma**n, abs=0.05)
            s = s_next
