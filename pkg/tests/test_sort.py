import numpy as np
import pytest

from core.errors import ContractViolation
from core.mdp import TERMINAL_AVERSIVE, TERMINAL_GOAL, run_episode
from envs.sort import (
    CENTER,
    CLASS_A,
    CLASS_B,
    DROP,
    GRAB,
    LEFT,
    MIN_STEPS,
    MOVE_LEFT,
    MOVE_RIGHT,
    NONE,
    RIGHT,
    STATE_COUNT,
    TOTAL_OBJECTS,
    ScriptedSorter,
    SortEnv,
    SortState,
    reachable_states,
    shortest_success_length,
    sort_state_from_index,
    sort_state_index,
    sort_transition,
    state_names,
)


def test_index_is_dense_and_invertible():
    assert STATE_COUNT == 1008
    assert sort_state_index(SortState()) == 0
    for i in range(STATE_COUNT):
        assert sort_state_index(sort_state_from_index(i)) == i
    with pytest.raises(ContractViolation):
        sort_state_from_index(STATE_COUNT)


def test_state_names_are_unique():
    names = state_names()
    assert len(names) == STATE_COUNT
    assert len(set(names)) == STATE_COUNT
    assert names[0] == "center|none|A3B3|ok0"


def test_scripted_episode_is_optimal():
    rng = np.random.default_rng(3)
    ep = run_episode(SortEnv(), ScriptedSorter(), [], rng, step_cap=100)
    assert ep.success
    assert ep.length == MIN_STEPS == 18
    assert ep.total_return == pytest.approx(3.0)


def test_brute_force_shortest_success_is_eighteen_steps():
    assert shortest_success_length() == 18


def test_reachable_states_include_start_and_exclude_impossible():
    reach = reachable_states()
    assert 0 in reach
    assert len(reach) < STATE_COUNT
    # holding an object with nothing removed cannot happen
    impossible = sort_state_index(SortState(holding=CLASS_A, remaining_a=3, remaining_b=3))
    assert impossible not in reach


def test_grab_moves_arm_to_center_and_picks_remaining_class():
    rng = np.random.default_rng(0)
    st = SortState(arm=LEFT, remaining_a=0, remaining_b=2, sorted_ok=3)
    res = sort_transition(st, GRAB, rng)
    assert res.state.arm == CENTER
    assert res.state.holding == CLASS_B
    assert res.state.remaining_b == 1
    assert res.outcome.reward == 0.0


def test_correct_drop_rewards_and_wrong_drop_is_aversive():
    rng = np.random.default_rng(0)
    ok = sort_transition(SortState(arm=LEFT, holding=CLASS_A, remaining_a=2), DROP, rng)
    assert ok.outcome.reward == pytest.approx(0.4)
    assert ok.state.sorted_ok == 1 and ok.state.holding == NONE

    bad = sort_transition(SortState(arm=RIGHT, holding=CLASS_A, remaining_a=2), DROP, rng)
    assert bad.outcome.next_state == TERMINAL_AVERSIVE
    assert bad.outcome.reward == -1.0
    assert bad.state is None


def test_last_drop_completes_task():
    rng = np.random.default_rng(0)
    st = SortState(arm=RIGHT, holding=CLASS_B, remaining_a=0, remaining_b=0, sorted_ok=5, step=17)
    res = sort_transition(st, DROP, rng)
    assert res.outcome.next_state == TERMINAL_GOAL
    assert res.outcome.reward == 1.0


def test_drop_at_center_and_moves_at_edges_are_noops():
    rng = np.random.default_rng(0)
    st = SortState(holding=CLASS_A, remaining_a=2)
    res = sort_transition(st, DROP, rng)
    assert res.state.holding == CLASS_A and res.outcome.reward == 0.0
    edge = sort_transition(SortState(arm=RIGHT), MOVE_RIGHT, rng)
    assert edge.state.arm == RIGHT
    back = sort_transition(SortState(arm=RIGHT), MOVE_LEFT, rng)
    assert back.state.arm == CENTER


def test_late_steps_are_penalised():
    rng = np.random.default_rng(0)
    on_time = sort_transition(SortState(step=MIN_STEPS - 1), MOVE_LEFT, rng)
    assert on_time.outcome.reward == 0.0
    late = sort_transition(SortState(step=MIN_STEPS), MOVE_LEFT, rng)
    assert late.outcome.reward == pytest.approx(-0.01)


def test_terminal_source_rejected():
    with pytest.raises(ContractViolation):
        sort_transition(None, GRAB, np.random.default_rng(0))
    with pytest.raises(ContractViolation):
        sort_transition(SortState(), 7, np.random.default_rng(0))


def test_grab_with_both_classes_picks_either():
    rng = np.random.default_rng(11)
    picked = {sort_transition(SortState(), GRAB, rng).state.holding for _ in range(200)}
    assert picked == {CLASS_A, CLASS_B}


def test_objects_are_conserved_along_random_walks():
    for i in reachable_states():
        assert sort_state_from_index(i).objects_accounted == TOTAL_OBJECTS

    rng = np.random.default_rng(17)
    for _ in range(200):
        state = SortState()
        for _ in range(500):
            if state is None:
                break
            assert state.objects_accounted == TOTAL_OBJECTS
            state = sort_transition(state, int(rng.integers(4)), rng).state
