"""estimators.py

The three success-probability estimators as episode-loop hooks.

  memory        T_s / T_t from counted transitions (storage grows with every step)
  learning      P-table trained next to Q with a success flag and gamma = 1
  introspection closed-form transform of the current Q-values (no storage)

Each estimator exposes `readout(q_values)` returning a (states, actions)
array of probabilities and `cells_allocated()` for storage accounting.
"""

from __future__ import annotations

import logging

import numpy as np

from core.errors import ContractViolation
from core.mdp import Episode, StepOutcome, is_terminal
from explainers.estimator_support import (
    IntrospectionParams,
    introspect_array,
    memory_prob,
    p_update,
    success_flag,
)

logger = logging.getLogger(__name__)


class EpisodicMemory:
    """Transition list for the running episode plus visit/success counters."""

    method = "memory"

    def __init__(self, state_count: int, action_count: int) -> None:
        self.t_list: list[tuple[int, int]] = []
        self.t_total = np.zeros((state_count, action_count), dtype=np.int64)
        self.t_success = np.zeros((state_count, action_count), dtype=np.int64)
        self._recorded = 0

    def record(self, s: int, a: int) -> None:
        self.t_list.append((s, a))
        self.t_total[s, a] += 1
        self._recorded += 1

    def finalize(self, success: bool) -> None:
        """Credit every occurrence in the episode's list on success; clear the list either way."""
        if self.t_list and success:
            pairs = np.asarray(self.t_list, dtype=np.int32)
            np.add.at(self.t_success, (pairs[:, 0], pairs[:, 1]), 1)
        self.t_list = []

    def prob(self, s: int, a: int) -> float:
        return memory_prob(self.t_success[s, a], self.t_total[s, a])

    def probs(self) -> np.ndarray:
        return memory_prob(self.t_success, self.t_total)

    # hooks
    def on_episode_start(self, s0: int) -> None:
        self.t_list = []

    def on_step(self, s: int, a: int, outcome: StepOutcome, a_next: int | None) -> None:
        self.record(s, a)

    def on_episode_end(self, episode: Episode) -> None:
        self.finalize(episode.success)

    def readout(self, q_values: np.ndarray) -> np.ndarray:
        return self.probs()

    def cells_allocated(self) -> int:
        # two counter tables plus every (s, a) pair kept in episodic memory
        return int(self.t_total.size + self.t_success.size + 2 * self._recorded)


class PTable:
    """Learned success probabilities, one cell per (state, action)."""

    def __init__(self, state_count: int, action_count: int) -> None:
        self.values = np.zeros((state_count, action_count), dtype=float)

    def bootstrap(self, s_next: int, a_next: int | None) -> float:
        if is_terminal(s_next) or a_next is None:
            return 0.0
        return float(self.values[s_next, a_next])

    def update(self, s: int, a: int, phi: int, s_next: int, a_next: int | None, *, alpha: float) -> float:
        return p_update(self.values, s, a, phi, self.bootstrap(s_next, a_next), alpha=alpha)


class LearningEstimator:
    method = "learning"

    def __init__(self, state_count: int, action_count: int, *, alpha: float) -> None:
        self.p = PTable(state_count, action_count)
        self.alpha = float(alpha)

    def on_episode_start(self, s0: int) -> None:
        pass

    def on_step(self, s: int, a: int, outcome: StepOutcome, a_next: int | None) -> None:
        self.p.update(s, a, success_flag(outcome), outcome.next_state, a_next, alpha=self.alpha)

    def on_episode_end(self, episode: Episode) -> None:
        pass

    def readout(self, q_values: np.ndarray) -> np.ndarray:
        return self.p.values.copy()

    def cells_allocated(self) -> int:
        return int(self.p.values.size)


class IntrospectionEstimator:
    method = "introspection"

    def __init__(self, params: IntrospectionParams) -> None:
        self.params = params

    def on_episode_start(self, s0: int) -> None:
        pass

    def on_step(self, s: int, a: int, outcome: StepOutcome, a_next: int | None) -> None:
        pass

    def on_episode_end(self, episode: Episode) -> None:
        pass

    def readout(self, q_values: np.ndarray) -> np.ndarray:
        return introspect_array(q_values, self.params)

    def cells_allocated(self) -> int:
        return 0


Estimator = EpisodicMemory | LearningEstimator | IntrospectionEstimator


def build_estimators(
    methods: tuple[str, ...],
    *,
    state_count: int,
    action_count: int,
    alpha: float,
    introspection: IntrospectionParams | None,
) -> list[Estimator]:
    """Estimators in a fixed order: memory, learning, introspection."""
    out: list[Estimator] = []
    if "memory" in methods:
        out.append(EpisodicMemory(state_count, action_count))
    if "learning" in methods:
        out.append(LearningEstimator(state_count, action_count, alpha=alpha))
    if "introspection" in methods:
        if introspection is None:
            raise ContractViolation("introspection estimator needs IntrospectionParams")
        out.append(IntrospectionEstimator(introspection))
    return out
