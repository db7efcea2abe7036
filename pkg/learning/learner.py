"""learner.py

Tabular SARSA with softmax (Boltzmann) and epsilon-greedy action selection.

    Q(s,a) <- Q(s,a) + alpha * [r + gamma * Q(s',a') - Q(s,a)]

Q(terminal, .) reads as 0. Argmax ties go to the lowest action index.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.special import softmax

from core.errors import ContractViolation
from core.mdp import StepOutcome, is_terminal

logger = logging.getLogger(__name__)


# -----------------------------
# Q-table
# -----------------------------

class QTable:
    """Dense state x action table of action values (reward units)."""

    def __init__(self, state_count: int, action_count: int, *, values: np.ndarray | None = None) -> None:
        if state_count <= 0 or action_count <= 0:
            raise ContractViolation("QTable shape must be positive")
        self.state_count = int(state_count)
        self.action_count = int(action_count)
        if values is None:
            self.values = np.zeros((self.state_count, self.action_count), dtype=float)
        else:
            values = np.asarray(values, dtype=float)
            if values.shape != (self.state_count, self.action_count):
                raise ContractViolation(f"values shape {values.shape} != {(self.state_count, self.action_count)}")
            if not np.all(np.isfinite(values)):
                raise ContractViolation("QTable values must be finite")
            self.values = values.copy()

    def check_index(self, s: int, a: int | None = None) -> None:
        if not 0 <= s < self.state_count:
            raise ContractViolation(f"state index {s} out of range [0, {self.state_count})")
        if a is not None and not 0 <= a < self.action_count:
            raise ContractViolation(f"action index {a} out of range [0, {self.action_count})")

    def get(self, s: int, a: int) -> float:
        self.check_index(s, a)
        return float(self.values[s, a])

    def bootstrap(self, s_next: int, a_next: int | None) -> float:
        """Q(s', a') with terminal and missing next action read as 0."""
        if is_terminal(s_next) or a_next is None:
            return 0.0
        return self.get(s_next, a_next)

    def row(self, s: int) -> np.ndarray:
        self.check_index(s)
        return self.values[s]

    def greedy_action(self, s: int) -> int:
        return int(np.argmax(self.row(s)))

    def snapshot(self) -> np.ndarray:
        return self.values.copy()

    def to_frame(self, state_names: list[str], action_names: list[str]) -> pd.DataFrame:
        """Rows = states, columns = actions."""
        return pd.DataFrame(self.values, index=pd.Index(state_names, name="state"), columns=action_names)


def _require_finite(**kw: float) -> None:
    for k, v in kw.items():
        if v is None or not math.isfinite(float(v)):
            raise ContractViolation(f"{k} must be finite, got {v!r}")


def sarsa_update(
    q: QTable,
    s: int,
    a: int,
    r: float,
    s_next: int,
    a_next: int | None,
    *,
    alpha: float,
    gamma: float,
) -> float:
    """One on-policy TD update of Q(s,a). Returns the new value; only that cell changes."""
    _require_finite(r=r, alpha=alpha, gamma=gamma)
    q.check_index(s, a)
    target = float(r) + float(gamma) * q.bootstrap(s_next, a_next)
    old = q.values[s, a]
    new = old + float(alpha) * (target - old)
    if not math.isfinite(new):
        raise ContractViolation(f"update produced non-finite Q({s},{a})")
    q.values[s, a] = new
    return float(new)


# -----------------------------
# Action selection
# -----------------------------

def softmax_probabilities(row: np.ndarray, tau: float) -> np.ndarray:
    """Boltzmann distribution exp(Q/tau) / sum exp(Q/tau) (max-subtracted by scipy)."""
    if not tau > 0:
        raise ContractViolation(f"tau must be > 0, got {tau}")
    return softmax(np.asarray(row, dtype=float) / float(tau))


def sample_index(probs: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; one uniform per call so RNG streams stay aligned."""
    cdf = np.cumsum(probs)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, len(probs) - 1)


def softmax_select(q: QTable, s: int, tau: float, rng: np.random.Generator) -> int:
    return sample_index(softmax_probabilities(q.row(s), tau), rng)


def epsilon_greedy_select(q: QTable, s: int, epsilon: float, rng: np.random.Generator) -> int:
    """Uniform random action with probability epsilon, else argmax (first index on ties)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ContractViolation(f"epsilon must be in [0, 1], got {epsilon}")
    row = q.row(s)
    if rng.random() < epsilon:
        return int(rng.integers(len(row)))
    return int(np.argmax(row))


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str = "softmax"  # softmax | epsilon_greedy
    tau: float = 0.25
    epsilon: float = 1.0
    epsilon_decay: float = 0.9995
    epsilon_min: float = 0.01

    def __post_init__(self) -> None:
        if self.kind not in ("softmax", "epsilon_greedy"):
            raise ContractViolation(f"unknown selection kind '{self.kind}'")
        if not self.tau > 0:
            raise ContractViolation("tau must be > 0")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ContractViolation("epsilon must be in [0, 1]")


# -----------------------------
# Agent
# -----------------------------

class SarsaAgent:
    """Policy + Q-table owner. Plugs into run_episode as both policy and step hook."""

    method = "q"

    def __init__(
        self,
        state_count: int,
        action_count: int,
        *,
        policy: SelectionPolicy,
        alpha: float,
        gamma: float,
    ) -> None:
        self.q = QTable(state_count, action_count)
        self.policy = policy
        self.alpha = float(alpha)
        self.gamma = float(gamma)
        self.epsilon = float(policy.epsilon)

    def select(self, s: int, rng: np.random.Generator) -> int:
        if self.policy.kind == "softmax":
            return softmax_select(self.q, s, self.policy.tau, rng)
        return epsilon_greedy_select(self.q, s, self.epsilon, rng)

    def on_episode_start(self, s0: int) -> None:
        pass

    def on_step(self, s: int, a: int, outcome: StepOutcome, a_next: int | None) -> None:
        sarsa_update(
            self.q, s, a, outcome.reward, outcome.next_state, a_next,
            alpha=self.alpha, gamma=self.gamma,
        )

    def on_episode_end(self, episode) -> None:
        if self.policy.kind == "epsilon_greedy":
            self.epsilon = max(self.policy.epsilon_min, self.epsilon * self.policy.epsilon_decay)
