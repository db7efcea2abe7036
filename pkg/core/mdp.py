"""mdp.py

Environment contract and the episode loop shared by all three estimators.

States are dense non-negative integers. The two terminal markers are negative
so they can never index a table row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Protocol

import numpy as np

from core.errors import ContractViolation

TERMINAL_GOAL = -1
TERMINAL_AVERSIVE = -2


class TerminalKind(str, Enum):
    NONE = "none"
    GOAL = "goal"
    AVERSIVE = "aversive"


def is_terminal(s: int) -> bool:
    return s < 0


def terminal_kind_of(s: int) -> TerminalKind:
    if s == TERMINAL_GOAL:
        return TerminalKind.GOAL
    if s == TERMINAL_AVERSIVE:
        return TerminalKind.AVERSIVE
    return TerminalKind.NONE


@dataclass(frozen=True)
class StepOutcome:
    next_state: int
    reward: float
    terminal_kind: TerminalKind = TerminalKind.NONE

    def __post_init__(self) -> None:
        if not math.isfinite(self.reward):
            raise ContractViolation(f"reward must be finite, got {self.reward}")
        if terminal_kind_of(self.next_state) is not self.terminal_kind:
            raise ContractViolation(
                f"terminal_kind {self.terminal_kind.value} does not match next_state {self.next_state}"
            )

    @property
    def is_goal(self) -> bool:
        return self.terminal_kind is TerminalKind.GOAL

    @property
    def is_terminal(self) -> bool:
        return self.terminal_kind is not TerminalKind.NONE


def outcome_to(next_state: int, reward: float) -> StepOutcome:
    return StepOutcome(next_state=next_state, reward=float(reward), terminal_kind=terminal_kind_of(next_state))


@dataclass
class Episode:
    transitions: list[tuple[int, int, float]] = field(default_factory=list)
    outcome: str = "failure"  # success | failure
    end: str = "step_cap"  # goal | aversive | step_cap

    @property
    def length(self) -> int:
        return len(self.transitions)

    @property
    def total_return(self) -> float:
        return float(sum(r for _, _, r in self.transitions))

    @property
    def success(self) -> bool:
        return self.outcome == "success"


class Environment(Protocol):
    name: str
    state_count: int
    action_count: int
    state_names: list[str]
    action_names: list[str]
    initial_state: int

    def reset(self, rng: np.random.Generator) -> int: ...

    def step(self, action: int, rng: np.random.Generator) -> StepOutcome: ...


class Policy(Protocol):
    def select(self, s: int, rng: np.random.Generator) -> int: ...


class EpisodeHook(Protocol):
    def on_episode_start(self, s0: int) -> None: ...

    def on_step(self, s: int, a: int, outcome: StepOutcome, a_next: int | None) -> None: ...

    def on_episode_end(self, episode: Episode) -> None: ...


def _check_indices(env: Environment, s: int, a: int) -> None:
    if not 0 <= s < env.state_count:
        raise ContractViolation(f"state index {s} out of range for {env.name}")
    if not 0 <= a < env.action_count:
        raise ContractViolation(f"action index {a} out of range for {env.name}")


def run_episode(
    env: Environment,
    policy: Policy,
    hooks: Iterable[EpisodeHook],
    rng: np.random.Generator,
    *,
    step_cap: int,
) -> Episode:
    """Run one episode. Hooks fire in the order given, per step then per episode.

    The episode ends on a goal or aversive terminal, or as a failure once
    `step_cap` transitions have been taken.
    """
    if step_cap <= 0:
        raise ContractViolation("step_cap must be positive")
    hooks = list(hooks)

    s = env.reset(rng)
    for h in hooks:
        h.on_episode_start(s)
    a = policy.select(s, rng)

    ep = Episode()
    for _ in range(step_cap):
        _check_indices(env, s, a)
        out = env.step(a, rng)
        ep.transitions.append((s, a, out.reward))

        a_next = None if out.is_terminal else policy.select(out.next_state, rng)
        for h in hooks:
            h.on_step(s, a, out, a_next)

        if out.is_terminal:
            ep.end = out.terminal_kind.value
            ep.outcome = "success" if out.is_goal else "failure"
            break
        s, a = out.next_state, a_next

    for h in hooks:
        h.on_episode_end(ep)
    return ep
