"""report_view.py

Plain-text reports: the per-state MSE / correlation tables written by
`analyze`, and the run overview printed by `report`.
"""

from __future__ import annotations

import numpy as np
import pandas as pd

from analysis.traces import StateAnalysis, mean_method_correlation
from core.errors import ContractViolation
from envs.nav import MIN_ACTIONS_TO_GOAL
from explainers.estimator_support import estimated_distance
from narrate.templates import pct

RULE = "-" * 72


def _section(title: str) -> list[str]:
    return ["", title, RULE]


def _table(df: pd.DataFrame, fmt: str = "{:.4f}") -> str:
    return df.to_string(float_format=lambda v: fmt.format(v) if np.isfinite(v) else "n/a")


# -----------------------------
# analyze
# -----------------------------

def render_analysis_report(
    *,
    env: str,
    sigma: float,
    agents: int,
    episodes: int,
    analyses: list[StateAnalysis],
    per_agent: bool = False,
) -> str:
    """MSE against the memory-based baseline per state (rows: methods, cols: actions)."""
    lines = [
        f"env: {env}   sigma: {sigma}   agents: {agents}   episodes: {episodes}",
        f"MSE basis: {'per-agent traces, averaged' if per_agent else 'mean traces'}",
    ]
    for res in analyses:
        lines += _section(f"state {res.state}")
        if res.mse is not None:
            lines.append("MSE vs memory-based")
            lines.append(_table(res.mse))
        else:
            lines.append("MSE: memory-based baseline not recorded")

        if res.correlation is not None:
            summary = mean_method_correlation(res.correlation, res.actions, res.methods)
            lines.append("")
            with_noise = any("noisy_mean" in vals for vals in summary.values())
            if with_noise:
                lines.append("Pearson correlation (mean within methods / mean and best vs noisy control)")
            else:
                lines.append("Pearson correlation (mean within methods)")
            for action, vals in summary.items():
                line = f"  {action:<12} within={vals['within']:.4f}"
                if "noisy_mean" in vals:
                    line += f"  noisy_mean={vals['noisy_mean']:.4f}  noisy_max={vals['noisy_max']:.4f}"
                lines.append(line)
            labels = res.correlation.labels
            undefined = [
                f"{labels[i]}/{labels[j]}"
                for i in range(len(labels))
                for j in range(i + 1, len(labels))
                if np.isnan(res.correlation.values[i, j])
            ]
            if undefined:
                lines.append(f"  undefined (constant trace): {', '.join(undefined)}")
    return "\n".join(lines) + "\n"


# -----------------------------
# report
# -----------------------------

def _visited_order(summary, limit: int) -> list[int]:
    counts = summary.memory_counts.get("t_total")
    n_states = len(summary.state_names)
    if n_states <= limit:
        return list(range(n_states))
    if counts is None:
        return list(range(limit))
    visits = np.asarray(counts).sum(axis=1)
    order = [int(s) for s in np.argsort(-visits, kind="stable") if visits[s] > 0]
    return order[:limit]


def q_contrast_lines(summary, states: list[int]) -> list[str]:
    """'a Q-value of 0.744' next to the matching probability for each state's greedy action."""
    probs = summary.final_probs.get("introspection")
    method = "introspection"
    if probs is None and summary.final_probs:
        method, probs = next(iter(summary.final_probs.items()))
    out = []
    for s in states:
        a = int(np.argmax(summary.final_q[s]))
        q = float(summary.final_q[s, a])
        line = f"  {summary.state_names[s]}: {summary.action_names[a]} has a Q-value of {q:.3f}"
        if probs is not None:
            line += f" vs a {pct(probs[s, a])} probability of success ({method}-based)"
        out.append(line)
    return out


def distance_lines(summary, states: list[int]) -> list[str]:
    """Estimated actions-to-goal from each greedy Q-value."""
    cfg = summary.config
    if not 0.0 < cfg.gamma < 1.0:
        return ["  estimated distance needs gamma < 1"]
    out = []
    for s in states:
        a = int(np.argmax(summary.final_q[s]))
        q = float(summary.final_q[s, a])
        try:
            n = estimated_distance(q, cfg.terminal_reward, cfg.gamma)
        except ContractViolation:
            out.append(f"  {summary.state_names[s]}: n/a (Q <= 0)")
            continue
        line = f"  {summary.state_names[s]}: {n:.2f} actions"
        if cfg.env == "navigation":
            line += f" (minimum {MIN_ACTIONS_TO_GOAL[s]})"
        out.append(line)
    return out


def render_run_report(summary, episodes: pd.DataFrame, *, max_states: int = 12) -> str:
    cfg = summary.config
    states = _visited_order(summary, max_states)
    names = [summary.state_names[s] for s in states]

    lines = [f"{summary.code_version}   env: {cfg.env}"]
    lines += _section("config")
    lines += [f"  {k} = {v}" for k, v in cfg.to_dict().items()]

    lines += _section("outcome")
    lines.append(f"  success rate:            {summary.success_rate:.4f}")
    lines.append(f"  mean return (last 50):   {summary.last50_mean_return:.4f}")
    if not episodes.empty:
        lines.append(f"  mean episode length:     {episodes['length'].mean():.2f}")

    if len(states) < len(summary.state_names):
        lines.append(f"  (tables show the {len(states)} most visited of {len(summary.state_names)} states)")

    q = pd.DataFrame(summary.final_q[states], index=names, columns=summary.action_names)
    lines += _section("final Q-values (mean over agents)")
    lines.append(_table(q))

    for method, arr in summary.final_probs.items():
        p = pd.DataFrame(arr[states], index=names, columns=summary.action_names)
        lines += _section(f"final {method}-based probabilities (mean over agents)")
        lines.append(_table(p))

    if summary.memory_counts:
        total = pd.DataFrame(summary.memory_counts["t_total"], columns=summary.action_names)
        succ = pd.DataFrame(summary.memory_counts["t_success"], columns=summary.action_names)
        lines += _section("memory counters T_s / T_t (summed over agents)")
        cells = succ.astype(str) + "/" + total.astype(str)
        cells.index = summary.state_names
        lines.append(cells.iloc[states].to_string())

    lines += _section("storage cells per estimator (mean over agents)")
    lines += [f"  {m:<14} {v:.0f}" for m, v in summary.memory_usage.items()]

    lines += _section("Q-value vs probability of success")
    lines += q_contrast_lines(summary, states)

    lines += _section("estimated distance to the goal")
    lines += distance_lines(summary, states)
    return "\n".join(lines) + "\n"
