"""sort.py

Symbolic sorting-object task.

A robot arm moves six objects (three of each class) from a central table to
two side tables, class A on the left and class B on the right. Actions: grab,
drop, move right, move left. Rewards:

    +0.4  an object sorted on the correct side
    +1    the sixth object sorted (task complete, goal terminal)
    -1    an object dropped on the wrong side (aversive terminal)
    -0.01 added to every step after the 18th

`grab` with an empty pad sends the arm to the central table and picks one of
the remaining objects at random, so the shortest successful episode is six
rounds of (grab, move, drop) = 18 steps with return 3.0.

The step counter drives the late penalty but is not part of the table index.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from core.errors import ContractViolation
from core.mdp import TERMINAL_AVERSIVE, TERMINAL_GOAL, StepOutcome, outcome_to

logger = logging.getLogger(__name__)

# arm positions; center first so the initial state encodes to 0
CENTER, LEFT, RIGHT = 0, 1, 2
ARM_NAMES = ["center", "left", "right"]

NONE, CLASS_A, CLASS_B = 0, 1, 2
HOLD_NAMES = ["none", "classA", "classB"]
CLASS_SIDE = {CLASS_A: LEFT, CLASS_B: RIGHT}

GRAB, DROP, MOVE_RIGHT, MOVE_LEFT = 0, 1, 2, 3
ACTION_NAMES = ["grab", "drop", "move_right", "move_left"]
ACTION_COUNT = 4

PER_CLASS = 3
TOTAL_OBJECTS = 2 * PER_CLASS
MIN_STEPS = 18

REWARD_SORTED = 0.4
REWARD_DONE = 1.0
REWARD_WRONG = -1.0
LATE_PENALTY = -0.01

# left -> center -> right
_LINE = [LEFT, CENTER, RIGHT]

STATE_COUNT = 3 * 3 * (PER_CLASS + 1) * (PER_CLASS + 1) * (TOTAL_OBJECTS + 1)


@dataclass(frozen=True)
class SortState:
    arm: int = CENTER
    holding: int = NONE
    remaining_a: int = PER_CLASS
    remaining_b: int = PER_CLASS
    sorted_ok: int = 0
    step: int = 0

    def __post_init__(self) -> None:
        if self.arm not in (CENTER, LEFT, RIGHT) or self.holding not in (NONE, CLASS_A, CLASS_B):
            raise ContractViolation(f"invalid arm/holding in {self}")
        if not (0 <= self.remaining_a <= PER_CLASS and 0 <= self.remaining_b <= PER_CLASS):
            raise ContractViolation(f"remaining counts out of range in {self}")
        if not 0 <= self.sorted_ok <= TOTAL_OBJECTS or self.step < 0:
            raise ContractViolation(f"sorted_ok/step out of range in {self}")

    @property
    def objects_accounted(self) -> int:
        return self.remaining_a + self.remaining_b + (1 if self.holding != NONE else 0) + self.sorted_ok

    def remaining(self, cls: int) -> int:
        return self.remaining_a if cls == CLASS_A else self.remaining_b

    def label(self) -> str:
        return (
            f"{ARM_NAMES[self.arm]}|{HOLD_NAMES[self.holding]}|"
            f"A{self.remaining_a}B{self.remaining_b}|ok{self.sorted_ok}"
        )


INITIAL_STATE = SortState()


def sort_state_index(state: SortState) -> int:
    """Dense index over (arm, holding, removed A, removed B, sorted_ok). Step excluded."""
    i = state.arm
    i = i * 3 + state.holding
    i = i * (PER_CLASS + 1) + (PER_CLASS - state.remaining_a)
    i = i * (PER_CLASS + 1) + (PER_CLASS - state.remaining_b)
    i = i * (TOTAL_OBJECTS + 1) + state.sorted_ok
    return i


def sort_state_from_index(index: int) -> SortState:
    if not 0 <= index < STATE_COUNT:
        raise ContractViolation(f"sorting state index {index} out of range")
    index, sorted_ok = divmod(index, TOTAL_OBJECTS + 1)
    index, removed_b = divmod(index, PER_CLASS + 1)
    index, removed_a = divmod(index, PER_CLASS + 1)
    arm, holding = divmod(index, 3)
    return SortState(
        arm=arm,
        holding=holding,
        remaining_a=PER_CLASS - removed_a,
        remaining_b=PER_CLASS - removed_b,
        sorted_ok=sorted_ok,
    )


class SortStep(NamedTuple):
    outcome: StepOutcome
    state: SortState | None  # None once terminal


def _move(arm: int, delta: int) -> int:
    pos = _LINE.index(arm) + delta
    return _LINE[min(max(pos, 0), len(_LINE) - 1)]


def _grab_choices(state: SortState) -> list[int]:
    return [c for c in (CLASS_A, CLASS_B) if state.remaining(c) > 0]


def _apply(state: SortState, action: int, picked: int | None) -> tuple[SortState | None, int, float]:
    """Deterministic core. Returns (next state or None, next index/terminal, event reward)."""
    nxt = replace(state, step=state.step + 1)

    if action == GRAB:
        if state.holding == NONE and picked is not None:
            nxt = replace(
                nxt,
                arm=CENTER,
                holding=picked,
                remaining_a=state.remaining_a - (picked == CLASS_A),
                remaining_b=state.remaining_b - (picked == CLASS_B),
            )
        return nxt, sort_state_index(nxt), 0.0

    if action == DROP:
        if state.holding == NONE or state.arm == CENTER:
            return nxt, sort_state_index(nxt), 0.0
        if CLASS_SIDE[state.holding] != state.arm:
            return None, TERMINAL_AVERSIVE, REWARD_WRONG
        nxt = replace(nxt, holding=NONE, sorted_ok=state.sorted_ok + 1)
        if nxt.sorted_ok == TOTAL_OBJECTS:
            return None, TERMINAL_GOAL, REWARD_DONE
        return nxt, sort_state_index(nxt), REWARD_SORTED

    if action in (MOVE_RIGHT, MOVE_LEFT):
        nxt = replace(nxt, arm=_move(state.arm, 1 if action == MOVE_RIGHT else -1))
        return nxt, sort_state_index(nxt), 0.0

    raise ContractViolation(f"sorting action must be in [0, 4), got {action}")


def sort_transition(state: SortState | None, action: int, rng: np.random.Generator) -> SortStep:
    """One step of the sorting task; `rng` decides which class a grab picks up."""
    if state is None:
        raise ContractViolation("sorting source state is terminal")
    if not 0 <= action < ACTION_COUNT:
        raise ContractViolation(f"sorting action must be in [0, 4), got {action}")

    picked = None
    if action == GRAB and state.holding == NONE:
        choices = _grab_choices(state)
        if len(choices) == 1:
            picked = choices[0]
        elif choices:
            picked = choices[int(rng.integers(len(choices)))]

    nxt, idx, reward = _apply(state, action, picked)
    if state.step + 1 > MIN_STEPS:
        reward += LATE_PENALTY
    return SortStep(outcome=outcome_to(idx, reward), state=nxt)


# -----------------------------
# Environment instance
# -----------------------------

class SortEnv:
    name = "sorting"
    state_count = STATE_COUNT
    action_count = ACTION_COUNT
    action_names = ACTION_NAMES
    initial_state = sort_state_index(INITIAL_STATE)

    def __init__(self) -> None:
        self.state: SortState | None = INITIAL_STATE

    @property
    def state_names(self) -> list[str]:
        return state_names()

    def reset(self, rng: np.random.Generator) -> int:
        self.state = INITIAL_STATE
        return sort_state_index(self.state)

    def step(self, action: int, rng: np.random.Generator) -> StepOutcome:
        res = sort_transition(self.state, action, rng)
        self.state = res.state
        return res.outcome


_STATE_NAMES: list[str] | None = None


def state_names() -> list[str]:
    global _STATE_NAMES
    if _STATE_NAMES is None:
        _STATE_NAMES = [sort_state_from_index(i).label() for i in range(STATE_COUNT)]
    return _STATE_NAMES


# -----------------------------
# Graph helpers
# -----------------------------

def successors(state: SortState) -> list[tuple[int, int, SortState | None, float]]:
    """Every (action, next index, next state, event reward) in the transition support."""
    out = []
    for action in range(ACTION_COUNT):
        if action == GRAB and state.holding == NONE and _grab_choices(state):
            picks: list[int | None] = list(_grab_choices(state))
        else:
            picks = [None]
        for picked in picks:
            nxt, idx, reward = _apply(state, action, picked)
            out.append((action, idx, nxt, reward))
    return out


def reachable_states() -> set[int]:
    """BFS over the transition support from the initial state (terminals excluded)."""
    start = replace(INITIAL_STATE, step=0)
    seen = {sort_state_index(start)}
    q: deque[SortState] = deque([start])
    while q:
        node = q.popleft()
        for _, idx, nxt, _ in successors(node):
            if nxt is None:
                continue
            nxt = replace(nxt, step=0)
            if idx not in seen:
                seen.add(idx)
                q.append(nxt)
    return seen


def shortest_success_length() -> int:
    """Fewest steps from the initial state to the goal terminal along any support path."""
    start = replace(INITIAL_STATE, step=0)
    dist = {sort_state_index(start): 0}
    q: deque[SortState] = deque([start])
    while q:
        node = q.popleft()
        d = dist[sort_state_index(node)]
        for _, idx, nxt, _ in successors(node):
            if idx == TERMINAL_GOAL:
                return d + 1
            if nxt is None:
                continue
            nxt = replace(nxt, step=0)
            if idx not in dist:
                dist[idx] = d + 1
                q.append(nxt)
    raise ContractViolation("goal unreachable")


class ScriptedSorter:
    """Optimal policy: grab, move to the object's side, drop."""

    def select(self, s: int, rng: np.random.Generator) -> int:
        st = sort_state_from_index(s)
        if st.holding == NONE:
            return GRAB
        side = CLASS_SIDE[st.holding]
        if st.arm == side:
            return DROP
        return MOVE_LEFT if _LINE.index(side) < _LINE.index(st.arm) else MOVE_RIGHT
