"""experiment.py

Train independent agents and collect per-episode traces.

One master seed per experiment; agent k draws from `default_rng(seed + k)`,
reduced mod 2**64 so negative seeds are valid. Agent results do not depend
on scheduling or on how many threads run.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from core.config import ExperimentConfig, max_threads
from core.mdp import run_episode
from debug.debug_tools import debug_event
from envs.registry import make_env, resolve_trace_states
from explainers.estimator_support import IntrospectionParams
from explainers.estimators import build_estimators
from learning.learner import SarsaAgent, SelectionPolicy

logger = logging.getLogger(__name__)


@dataclass
class RunArtifacts:
    """Everything one agent run produces.

    Trace arrays are shaped (episodes, len(traced_states), actions).
    """

    agent: int
    env: str
    state_names: list[str]
    action_names: list[str]
    traced_states: list[int]
    q_trace: np.ndarray
    prob_traces: dict[str, np.ndarray]
    episode_log: pd.DataFrame
    memory_usage: dict[str, int]
    memory_usage_trace: dict[str, np.ndarray]
    final_q: np.ndarray
    final_probs: dict[str, np.ndarray] = field(default_factory=dict)
    memory_counts: dict[str, np.ndarray] = field(default_factory=dict)  # t_total, t_success

    @property
    def episodes(self) -> int:
        return int(self.q_trace.shape[0])


def introspection_params(config: ExperimentConfig) -> IntrospectionParams | None:
    if "introspection" not in config.methods:
        return None
    return IntrospectionParams(
        terminal_reward=config.terminal_reward,
        sigma=config.sigma,
        gamma=config.gamma,
    )


def selection_policy(config: ExperimentConfig) -> SelectionPolicy:
    return SelectionPolicy(
        kind=config.selection,
        tau=config.tau,
        epsilon=config.epsilon,
        epsilon_decay=config.epsilon_decay,
        epsilon_min=config.epsilon_min,
    )


def _memory_counts(estimators) -> dict[str, np.ndarray]:
    for e in estimators:
        if e.method == "memory":
            return {"t_total": e.t_total.copy(), "t_success": e.t_success.copy()}
    return {}


SEED_MODULUS = 2**64


def seeded_rng(seed: int, offset: int = 0) -> np.random.Generator:
    # SeedSequence only takes non-negative entropy
    return np.random.default_rng((seed + offset) % SEED_MODULUS)


def run_agent(config: ExperimentConfig, agent: int) -> RunArtifacts:
    """Train one agent for `config.episodes` episodes and record traces after each one."""
    rng = seeded_rng(config.seed, agent)
    env = make_env(config)
    traced = resolve_trace_states(config, env)

    learner = SarsaAgent(
        env.state_count,
        env.action_count,
        policy=selection_policy(config),
        alpha=config.alpha,
        gamma=config.gamma,
    )
    estimators = build_estimators(
        config.methods,
        state_count=env.state_count,
        action_count=env.action_count,
        alpha=config.alpha,
        introspection=introspection_params(config),
    )

    # memory records before the Q update, the P update follows it
    hooks = []
    hooks += [e for e in estimators if e.method == "memory"]
    hooks.append(learner)
    hooks += [e for e in estimators if e.method == "learning"]

    n_ep, n_tr, n_act = config.episodes, len(traced), env.action_count
    q_trace = np.zeros((n_ep, n_tr, n_act))
    prob_traces = {e.method: np.zeros((n_ep, n_tr, n_act)) for e in estimators}
    usage_trace = {e.method: np.zeros(n_ep, dtype=np.int64) for e in estimators}
    log_rows: list[dict] = []

    for ep_i in range(n_ep):
        epsilon = learner.epsilon
        episode = run_episode(env, learner, hooks, rng, step_cap=config.step_cap)

        q_now = learner.q.values
        q_trace[ep_i] = q_now[traced]
        for e in estimators:
            prob_traces[e.method][ep_i] = e.readout(q_now)[traced]
            usage_trace[e.method][ep_i] = e.cells_allocated()

        log_rows.append(
            {
                "agent": agent,
                "episode": ep_i,
                "length": episode.length,
                "outcome": episode.outcome,
                "end": episode.end,
                "return": episode.total_return,
                "epsilon": epsilon if config.selection == "epsilon_greedy" else float("nan"),
            }
        )

    final_q = learner.q.snapshot()
    return RunArtifacts(
        agent=agent,
        env=config.env,
        state_names=list(env.state_names),
        action_names=list(env.action_names),
        traced_states=traced,
        q_trace=q_trace,
        prob_traces=prob_traces,
        episode_log=pd.DataFrame(log_rows),
        memory_usage={e.method: int(e.cells_allocated()) for e in estimators},
        memory_usage_trace=usage_trace,
        final_q=final_q,
        final_probs={e.method: e.readout(final_q) for e in estimators},
        memory_counts=_memory_counts(estimators),
    )


def run_experiment(config: ExperimentConfig, *, threads: int | None = None) -> list[RunArtifacts]:
    """Train `config.agents` agents, concurrently, and return their artifacts in agent order."""
    workers = max(1, min(threads or max_threads(), config.agents))
    t0 = time.perf_counter()
    debug_event(
        "experiment_started",
        level="info",
        env=config.env,
        agents=config.agents,
        episodes=config.episodes,
        sigma=config.sigma,
        workers=workers,
    )

    def _one(agent: int) -> RunArtifacts:
        art = run_agent(config, agent)
        log = art.episode_log
        debug_event(
            "agent_finished",
            agent=agent,
            success_rate=float((log["outcome"] == "success").mean()),
            mean_length=float(log["length"].mean()),
        )
        return art

    if workers == 1:
        runs = [_one(k) for k in range(config.agents)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(_one, range(config.agents)))

    debug_event("experiment_finished", level="info", seconds=time.perf_counter() - t0)
    return runs
