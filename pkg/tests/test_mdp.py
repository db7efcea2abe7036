import numpy as np
import pytest

from core.errors import ContractViolation
from core.mdp import (
    TERMINAL_AVERSIVE,
    TERMINAL_GOAL,
    StepOutcome,
    TerminalKind,
    outcome_to,
    run_episode,
)
from envs.nav import A_S, FrozenPolicy, NavEnv, shortest_path_policy


class Recorder:
    def __init__(self, name, log):
        self.name = name
        self.log = log

    def on_episode_start(self, s0):
        self.log.append((self.name, "start", s0))

    def on_step(self, s, a, outcome, a_next):
        self.log.append((self.name, "step", s, a, outcome.next_state, a_next))

    def on_episode_end(self, episode):
        self.log.append((self.name, "end", episode.outcome))


def test_outcome_to_sets_terminal_kind():
    assert outcome_to(TERMINAL_GOAL, 1.0).is_goal
    assert outcome_to(TERMINAL_AVERSIVE, -1.0).terminal_kind is TerminalKind.AVERSIVE
    assert not outcome_to(3, 0.0).is_terminal


def test_step_outcome_rejects_mismatched_kind_and_nan():
    with pytest.raises(ContractViolation):
        StepOutcome(next_state=2, reward=0.0, terminal_kind=TerminalKind.GOAL)
    with pytest.raises(ContractViolation):
        outcome_to(1, float("nan"))


def test_shortest_path_episode_succeeds_in_three_steps():
    rng = np.random.default_rng(0)
    policy = FrozenPolicy(shortest_path_policy())
    ep = run_episode(NavEnv(0.0), policy, [], rng, step_cap=50)
    assert ep.success
    assert ep.end == "goal"
    assert ep.length == 3
    assert ep.total_return == 1.0
    assert [(s, a) for s, a, _ in ep.transitions] == [(0, 0), (1, 1), (3, 1)]


def test_step_cap_ends_as_failure():
    probs = np.zeros((6, 3))
    probs[:, A_S] = 1.0
    ep = run_episode(NavEnv(0.0), FrozenPolicy(probs), [], np.random.default_rng(1), step_cap=7)
    assert ep.length == 7
    assert ep.outcome == "failure"
    assert ep.end == "step_cap"


def test_hooks_fire_in_order_with_none_next_action_at_terminal():
    log = []
    hooks = [Recorder("first", log), Recorder("second", log)]
    run_episode(NavEnv(0.0), FrozenPolicy(shortest_path_policy()), hooks, np.random.default_rng(0), step_cap=10)

    assert log[0] == ("first", "start", 0)
    assert log[1] == ("second", "start", 0)
    steps = [e for e in log if e[1] == "step"]
    assert [e[0] for e in steps] == ["first", "second"] * 3
    assert steps[-1][4] == TERMINAL_GOAL
    assert steps[-1][5] is None
    assert log[-1] == ("second", "end", "success")


def test_step_cap_must_be_positive():
    with pytest.raises(ContractViolation):
        run_episode(NavEnv(0.0), FrozenPolicy(shortest_path_policy()), [], np.random.default_rng(0), step_cap=0)
