"""nav.py

Six-room robot navigation task.

The robot starts in room 0 and must reach the table in room 5 through one of
two symmetric paths. Each intermediate room has one door that leaves the level
(aversive terminal). Entering room 5 completes the task.

With stochasticity sigma the intended outcome happens with probability
1 - sigma; otherwise the outcome of one of the other two actions from the same
room happens, each with probability sigma / 2.
"""

from __future__ import annotations

import json
import logging

import numpy as np

from core.errors import ContractViolation, SingularSystemError
from core.mdp import TERMINAL_AVERSIVE, TERMINAL_GOAL, StepOutcome, is_terminal, outcome_to
from learning.learner import sample_index

logger = logging.getLogger(__name__)

A_L, A_R, A_S = 0, 1, 2
ACTION_NAMES = ["a_L", "a_R", "a_S"]
STATE_NAMES = [f"s{i}" for i in range(6)]
STATE_COUNT = 6
ACTION_COUNT = 3
INITIAL_STATE = 0
GOAL_ROOM = 5

AV, GOAL = TERMINAL_AVERSIVE, TERMINAL_GOAL

# intended outcome per (room, action) in a_L, a_R, a_S order
TRANSITIONS: dict[int, tuple[int, int, int]] = {
    0: (1, 2, 0),
    1: (AV, 3, 1),
    2: (4, AV, 2),
    3: (AV, GOAL, 3),
    4: (GOAL, AV, 4),
    5: (GOAL, GOAL, GOAL),
}

MIN_ACTIONS_TO_GOAL = {0: 3, 1: 2, 2: 2, 3: 1, 4: 1, 5: 1}


def outcome_name(s: int) -> str:
    if s == GOAL:
        return "GOAL"
    if s == AV:
        return "AVERSIVE"
    return STATE_NAMES[s]


def _check(state: int, action: int, sigma: float) -> None:
    if is_terminal(state) or not 0 <= state < STATE_COUNT:
        raise ContractViolation(f"navigation source state must be a room, got {state}")
    if not 0 <= action < ACTION_COUNT:
        raise ContractViolation(f"navigation action must be in [0, 3), got {action}")
    if not 0.0 <= sigma <= 1.0:
        raise ContractViolation(f"sigma must be in [0, 1], got {sigma}")


def nav_reward(reached: int) -> float:
    """+1 on the goal, -1 on leaving the level, 0 elsewhere."""
    if reached == GOAL:
        return 1.0
    if reached == AV:
        return -1.0
    return 0.0


def outcome_distribution(state: int, action: int, sigma: float) -> dict[int, float]:
    """Next-state distribution of (state, action). Sums to 1."""
    _check(state, action, sigma)
    row = TRANSITIONS[state]
    dist: dict[int, float] = {}
    dist[row[action]] = dist.get(row[action], 0.0) + (1.0 - sigma)
    for other in range(ACTION_COUNT):
        if other != action:
            dist[row[other]] = dist.get(row[other], 0.0) + sigma / 2.0
    return dist


def nav_transition(state: int, action: int, sigma: float, rng: np.random.Generator) -> StepOutcome:
    _check(state, action, sigma)
    row = TRANSITIONS[state]
    if rng.random() < 1.0 - sigma:
        reached = row[action]
    else:
        others = [o for o in range(ACTION_COUNT) if o != action]
        reached = row[others[int(rng.integers(2))]]
    return outcome_to(reached, nav_reward(reached))


def transition_table_json() -> str:
    table = {
        STATE_NAMES[s]: {ACTION_NAMES[a]: outcome_name(nxt) for a, nxt in enumerate(row)}
        for s, row in TRANSITIONS.items()
    }
    return json.dumps({"initial_state": STATE_NAMES[INITIAL_STATE], "transitions": table}, indent=2)


# -----------------------------
# Environment instance
# -----------------------------

class NavEnv:
    name = "navigation"
    state_count = STATE_COUNT
    action_count = ACTION_COUNT
    state_names = STATE_NAMES
    action_names = ACTION_NAMES
    initial_state = INITIAL_STATE

    def __init__(self, sigma: float = 0.0) -> None:
        if not 0.0 <= sigma <= 1.0:
            raise ContractViolation(f"sigma must be in [0, 1], got {sigma}")
        self.sigma = float(sigma)
        self.room = INITIAL_STATE

    def reset(self, rng: np.random.Generator) -> int:
        self.room = INITIAL_STATE
        return self.room

    def step(self, action: int, rng: np.random.Generator) -> StepOutcome:
        out = nav_transition(self.room, action, self.sigma, rng)
        self.room = out.next_state
        return out


# -----------------------------
# Fixed policies + exact oracle
# -----------------------------

class FrozenPolicy:
    """A fixed stochastic policy: probs[s] is the action distribution in room s."""

    def __init__(self, probs: np.ndarray) -> None:
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (STATE_COUNT, ACTION_COUNT):
            raise ContractViolation(f"policy shape must be {(STATE_COUNT, ACTION_COUNT)}, got {probs.shape}")
        if np.any(probs < 0) or not np.allclose(probs.sum(axis=1), 1.0):
            raise ContractViolation("policy rows must be probability distributions")
        self.probs = probs

    def select(self, s: int, rng: np.random.Generator) -> int:
        return sample_index(self.probs[s], rng)


def shortest_path_policy(*, first: int = A_L) -> np.ndarray:
    """Greedy shortest path; `first` picks the left or right path from room 0."""
    probs = np.zeros((STATE_COUNT, ACTION_COUNT))
    probs[0, first] = 1.0
    probs[1, A_R] = 1.0
    probs[2, A_L] = 1.0
    probs[3, A_R] = 1.0
    probs[4, A_L] = 1.0
    probs[5, A_S] = 1.0
    return probs


def exact_success_probability(policy: np.ndarray, sigma: float) -> np.ndarray:
    """Probability of absorbing at the goal after taking `a` in `s` and then following `policy`.

    Solves V = b + M V over the rooms, where M holds room-to-room transition
    probabilities under the policy and b the one-step goal probability.
    Returns a (states, actions) array.
    """
    policy = FrozenPolicy(policy).probs
    if not 0.0 <= sigma <= 1.0:
        raise ContractViolation(f"sigma must be in [0, 1], got {sigma}")

    # per (s, a): room transition row + direct goal probability
    room_rows = np.zeros((STATE_COUNT, ACTION_COUNT, STATE_COUNT))
    goal_now = np.zeros((STATE_COUNT, ACTION_COUNT))
    for s in range(STATE_COUNT):
        for a in range(ACTION_COUNT):
            for nxt, p in outcome_distribution(s, a, sigma).items():
                if nxt == GOAL:
                    goal_now[s, a] += p
                elif nxt >= 0:
                    room_rows[s, a, nxt] += p

    m = np.einsum("sa,sat->st", policy, room_rows)
    b = np.einsum("sa,sa->s", policy, goal_now)
    lhs = np.eye(STATE_COUNT) - m

    if np.linalg.cond(lhs) > 1e12:
        raise SingularSystemError("policy never leaves some rooms; absorption probabilities undefined")
    v = np.linalg.solve(lhs, b)

    residual = float(np.max(np.abs(lhs @ v - b)))
    if residual > 1e-10:
        raise SingularSystemError(f"absorption solve residual {residual:.3g} exceeds 1e-10")

    q = goal_now + np.einsum("sat,t->sa", room_rows, v)
    return np.clip(q, 0.0, 1.0)
