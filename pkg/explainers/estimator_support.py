"""estimator_support.py

Pure helpers for the three success-probability estimators.

No state lives here; `estimators.py` wires these into the episode loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from core.errors import ContractViolation
from core.mdp import StepOutcome


@dataclass(frozen=True)
class IntrospectionParams:
    terminal_reward: float = 1.0  # R^T
    sigma: float = 0.0
    gamma: float = 0.9

    def __post_init__(self) -> None:
        if not self.terminal_reward > 0:
            raise ContractViolation(f"terminal_reward must be > 0, got {self.terminal_reward}")
        if not 0.0 <= self.sigma <= 1.0:
            raise ContractViolation(f"sigma must be in [0, 1], got {self.sigma}")
        if not 0.0 < self.gamma < 1.0:
            raise ContractViolation(f"gamma must be in (0, 1), got {self.gamma}")


# -----------------------------
# Memory-based
# -----------------------------

def memory_prob(t_success: np.ndarray | float, t_total: np.ndarray | float) -> np.ndarray | float:
    """T_s / T_t, with unvisited pairs reading 0."""
    ts = np.asarray(t_success, dtype=float)
    tt = np.asarray(t_total, dtype=float)
    out = np.divide(ts, tt, out=np.zeros_like(tt), where=tt > 0)
    return float(out) if out.ndim == 0 else out


# -----------------------------
# Learning-based
# -----------------------------

def success_flag(outcome: StepOutcome) -> int:
    """1 only on the transition that completes the task."""
    return 1 if outcome.is_goal else 0


def p_update(
    p: np.ndarray,
    s: int,
    a: int,
    phi: int,
    p_next: float,
    *,
    alpha: float,
) -> float:
    """P(s,a) <- P(s,a) + alpha * [phi + P(s',a') - P(s,a)]  (gamma = 1).

    `p_next` is P(s',a'), already read as 0 for terminal s'.
    """
    for k, v in (("phi", phi), ("p_next", p_next), ("alpha", alpha)):
        if not math.isfinite(float(v)):
            raise ContractViolation(f"{k} must be finite, got {v!r}")
    old = p[s, a]
    new = old + float(alpha) * (float(phi) + float(p_next) - old)
    p[s, a] = new
    return float(new)


# -----------------------------
# Introspection-based
# -----------------------------

def estimated_distance(q: float, r_terminal: float, gamma: float) -> float:
    """n = log_gamma(Q / R^T): actions left to the terminal reward if Q = R^T * gamma^n."""
    if not q > 0:
        raise ContractViolation(f"distance undefined for q <= 0 (q={q})")
    if not r_terminal > 0 or not 0.0 < gamma < 1.0:
        raise ContractViolation("need r_terminal > 0 and gamma in (0, 1)")
    return math.log(q / r_terminal) / math.log(gamma)


def introspect_unclamped(q: float, params: IntrospectionParams) -> float:
    """(1 - sigma) * (n / (2 * log_gamma 10) + 1), the distance-weighted form."""
    n = estimated_distance(q, params.terminal_reward, params.gamma)
    log_gamma_10 = math.log(10.0) / math.log(params.gamma)
    return (1.0 - params.sigma) * (n / (2.0 * log_gamma_10) + 1.0)


def introspect(q: float, params: IntrospectionParams) -> float:
    """clamp_[0,1]((1 - sigma) * (0.5 * log10(Q / R^T) + 1)); 0 when Q <= 0."""
    if not q > 0:
        return 0.0
    raw = (1.0 - params.sigma) * (0.5 * math.log10(q / params.terminal_reward) + 1.0)
    return min(1.0, max(0.0, raw))


def introspect_array(q_values: np.ndarray, params: IntrospectionParams) -> np.ndarray:
    """Vectorised `introspect` over a Q array of any shape."""
    q = np.asarray(q_values, dtype=float)
    pos = q > 0
    ratio = np.where(pos, q / params.terminal_reward, 1.0)
    raw = (1.0 - params.sigma) * (0.5 * np.log10(ratio) + 1.0)
    return np.where(pos, np.clip(raw, 0.0, 1.0), 0.0)
