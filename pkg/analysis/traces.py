"""traces.py

Long-format trace tables and the comparisons built on them.

A trace frame has one row per (agent, episode, state, action, method) with the
estimate recorded after that episode. Methods: memory, learning,
introspection (probabilities) and q (raw action values).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from analysis.stats import mean_trace, mse, noisy_control, pearson
from core.config import METHODS, TRACE_COLUMNS, C
from core.errors import ContractViolation, DataMismatchError

logger = logging.getLogger(__name__)

METHOD_LETTER = {"memory": "m", "learning": "l", "introspection": "p", "noisy": "n"}
PROBABILITY_METHODS = METHODS


def action_label(action_name: str) -> str:
    """Axis label letter(s): a_L -> L, move_right -> MR, grab -> G."""
    if action_name.startswith("a_"):
        return action_name[2:].upper()
    return "".join(part[:1].upper() for part in action_name.split("_") if part)


def key_label(action_name: str, method: str) -> str:
    """Uppercase action + lowercase method, e.g. Lm, Rl, Sp, Ln."""
    return f"{action_label(action_name)}{METHOD_LETTER[method]}"


# -----------------------------
# Frames
# -----------------------------

def runs_to_frame(runs) -> pd.DataFrame:
    """Flatten RunArtifacts into the long trace table (probability methods, then q)."""
    parts: list[pd.DataFrame] = []
    for run in runs:
        n_ep, n_tr, n_act = run.q_trace.shape
        ep, st, ac = np.meshgrid(np.arange(n_ep), np.arange(n_tr), np.arange(n_act), indexing="ij")
        state_names = np.asarray(run.state_names, dtype=object)[np.asarray(run.traced_states)][st.ravel()]
        action_names = np.asarray(run.action_names, dtype=object)[ac.ravel()]

        series = dict(run.prob_traces)
        series["q"] = run.q_trace
        for method, arr in series.items():
            parts.append(
                pd.DataFrame(
                    {
                        C.agent: run.agent,
                        C.episode: ep.ravel(),
                        C.state: state_names,
                        C.action: action_names,
                        C.method: method,
                        C.value: arr.ravel(),
                    }
                )
            )
    if not parts:
        return pd.DataFrame(columns=TRACE_COLUMNS)
    return pd.concat(parts, ignore_index=True)[TRACE_COLUMNS]


def validate_trace_frame(frame: pd.DataFrame) -> pd.DataFrame:
    missing = [c for c in TRACE_COLUMNS if c not in frame.columns]
    if missing:
        raise DataMismatchError(f"trace table is missing columns {missing}")
    probs = frame[frame[C.method].isin(PROBABILITY_METHODS)][C.value]
    if len(probs) and (probs.min() < 0.0 or probs.max() > 1.0):
        raise DataMismatchError("probability trace values outside [0, 1]")
    return frame


def methods_in(frame: pd.DataFrame) -> list[str]:
    present = set(frame[C.method].unique())
    return [m for m in PROBABILITY_METHODS if m in present]


def trace_matrix(frame: pd.DataFrame, method: str, state: str, action: str) -> np.ndarray:
    """(agents, episodes) array for one method/state/action."""
    sel = frame[(frame[C.method] == method) & (frame[C.state] == state) & (frame[C.action] == action)]
    if sel.empty:
        raise DataMismatchError(f"no '{method}' trace for state {state}, action {action}")
    wide = sel.pivot_table(index=C.agent, columns=C.episode, values=C.value, aggfunc="mean")
    if wide.isna().any().any():
        raise DataMismatchError(
            f"agents cover different episode ranges for {method}/{state}/{action}; runs cannot be aligned"
        )
    return wide.to_numpy()


def mean_series(frame: pd.DataFrame, method: str, state: str, action: str) -> np.ndarray:
    return mean_trace(list(trace_matrix(frame, method, state, action)))


# -----------------------------
# Correlation + MSE
# -----------------------------

@dataclass
class CorrelationMatrix:
    labels: list[str]
    values: np.ndarray  # NaN marks NOT_DEFINED entries

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.values, index=self.labels, columns=self.labels)

    def get(self, a: str, b: str) -> float | None:
        v = self.values[self.labels.index(a), self.labels.index(b)]
        return None if np.isnan(v) else float(v)


def correlation_matrix(series: dict[str, np.ndarray]) -> CorrelationMatrix:
    """Pairwise Pearson; symmetric with unit diagonal. Undefined pairs stay NaN."""
    labels = list(series)
    if len(labels) < 2:
        raise ContractViolation("correlation_matrix needs at least 2 traces")
    n = len(labels)
    vals = np.full((n, n), np.nan)
    for i in range(n):
        vals[i, i] = 1.0
        for j in range(i + 1, n):
            r = pearson(series[labels[i]], series[labels[j]])
            if r is not None:
                vals[i, j] = vals[j, i] = r
    return CorrelationMatrix(labels=labels, values=vals)


def mse_table(
    baseline: dict[str, np.ndarray],
    others: dict[str, dict[str, np.ndarray]],
    *,
    per_agent: bool = False,
) -> pd.DataFrame:
    """MSE of each method against the baseline, rows = methods, columns = actions.

    With per_agent=True the arrays are (agents, episodes) and the table holds the
    mean over agents of the per-agent MSE.
    """
    rows = {}
    for method, by_action in others.items():
        row = {}
        for action, base in baseline.items():
            if action not in by_action:
                raise DataMismatchError(f"method '{method}' has no trace for action {action}")
            other = by_action[action]
            if per_agent:
                b2, o2 = np.atleast_2d(base), np.atleast_2d(other)
                if b2.shape != o2.shape:
                    raise DataMismatchError(f"per-agent shapes differ: {b2.shape} vs {o2.shape}")
                row[action] = float(np.mean([mse(bb, oo) for bb, oo in zip(b2, o2)]))
            else:
                row[action] = mse(base, other)
        rows[method] = row
    out = pd.DataFrame.from_dict(rows, orient="index", columns=list(baseline))
    out.index.name = "method"
    return out


# -----------------------------
# One-state bundle
# -----------------------------

@dataclass
class StateAnalysis:
    state: str
    actions: list[str]
    methods: list[str]
    mean: dict[str, dict[str, np.ndarray]] = field(default_factory=dict)  # method -> action -> trace
    correlation: CorrelationMatrix | None = None
    mse: pd.DataFrame | None = None

    def series_by_label(self) -> dict[str, np.ndarray]:
        out = {}
        for method, by_action in self.mean.items():
            for action, trace in by_action.items():
                out[key_label(action, method)] = trace
        return out


def analyze_state(
    frame: pd.DataFrame,
    state: str,
    *,
    rng: np.random.Generator,
    per_agent: bool = False,
) -> StateAnalysis:
    """Mean traces, the noisy control, correlations and MSE table for one state."""
    methods = methods_in(frame)
    if not methods:
        raise DataMismatchError("trace table has no probability methods")
    actions = [a for a in pd.unique(frame.loc[frame[C.state] == state, C.action])]
    if not actions:
        raise DataMismatchError(f"state {state} has no traces")

    res = StateAnalysis(state=state, actions=actions, methods=list(methods))
    for method in methods:
        res.mean[method] = {a: mean_series(frame, method, state, a) for a in actions}

    if "memory" in methods:
        res.mean["noisy"] = {a: noisy_control(res.mean["memory"][a], rng) for a in actions}

    labels = res.series_by_label()
    if len(labels) >= 2:
        res.correlation = correlation_matrix(labels)

    if "memory" in methods:
        if per_agent:
            base = {a: trace_matrix(frame, "memory", state, a) for a in actions}
            others = {
                m: {a: trace_matrix(frame, m, state, a) for a in actions}
                for m in methods
                if m != "memory"
            }
            others["noisy"] = {a: np.vstack([noisy_control(row, rng) for row in base[a]]) for a in actions}
        else:
            base = res.mean["memory"]
            others = {m: res.mean[m] for m in methods if m != "memory"}
            others["noisy"] = res.mean["noisy"]
        res.mse = mse_table(base, others, per_agent=per_agent)

    logger.debug("analyzed state %s: methods=%s actions=%s", state, methods, actions)
    return res


def mean_method_correlation(
    corr: CorrelationMatrix, actions: list[str], methods: list[str]
) -> dict[str, dict[str, float]]:
    """Per action: mean correlation among the methods, and the mean and best method-vs-noisy correlation."""
    out = {}
    for a in actions:
        within = []
        for i, m1 in enumerate(methods):
            for m2 in methods[i + 1:]:
                v = corr.get(key_label(a, m1), key_label(a, m2))
                if v is not None:
                    within.append(v)
        out[a] = {"within": float(np.mean(within)) if within else float("nan")}
        # no noisy series without the memory baseline
        if key_label(a, "noisy") not in corr.labels:
            continue
        noisy = [corr.get(key_label(a, m), key_label(a, "noisy")) for m in methods]
        noisy = [v for v in noisy if v is not None]
        out[a]["noisy_mean"] = float(np.mean(noisy)) if noisy else float("nan")
        out[a]["noisy_max"] = float(np.max(noisy)) if noisy else float("nan")
    return out
