"""templates.py

Why / why-not / compare explanations built from success-probability estimates.

Estimates are passed as {method: array over actions} for a single state.
Percentages are rendered with two decimals and every number in the text is
one of the cited probabilities; Q-values never appear.
"""

from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field

import numpy as np

from core.errors import ContractViolation
from debug.debug_tools import debug_event

logger = logging.getLogger(__name__)

KINDS = ("why", "why_not", "compare")
METHOD_ORDER = ("memory", "learning", "introspection")

_PCT = re.compile(r"(\d+\.\d{2})%")


@dataclass(frozen=True)
class ExplanationQuery:
    kind: str
    state: int
    action: int | None = None
    methods: tuple[str, ...] = METHOD_ORDER

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ContractViolation(f"unknown explanation kind '{self.kind}'")
        if (self.action is None) != (self.kind == "compare"):
            raise ContractViolation("action is required for why/why_not and not allowed for compare")
        if not self.methods:
            raise ContractViolation("at least one method is required")


@dataclass
class Explanation:
    text: str
    cited_probabilities: dict[str, dict[str, float]] = field(default_factory=dict)
    chosen_action: int = 0
    query: ExplanationQuery | None = None

    def to_json(self) -> str:
        q = self.query
        return json.dumps(
            {
                "query": None
                if q is None
                else {"kind": q.kind, "state": q.state, "action": q.action, "methods": list(q.methods)},
                "text": self.text,
                "chosen_action": self.chosen_action,
                "cited_probabilities": self.cited_probabilities,
            },
            indent=2,
        )


def pct(p: float) -> str:
    return f"{100.0 * float(p):.2f}%"


def parse_percentages(text: str) -> list[float]:
    """Every percentage in `text`, as a probability."""
    return [float(m) / 100.0 for m in _PCT.findall(text)]


def method_label(method: str) -> str:
    return f"observed, {method}-based" if method == "memory" else f"estimated, {method}-based"


def _argmax(values: np.ndarray) -> int:
    return int(np.argmax(values))


def _ties(values: np.ndarray) -> list[int]:
    best = np.max(values)
    return [i for i, v in enumerate(values) if v == best]


def _prepare(
    estimates: dict[str, np.ndarray],
    action_names: list[str],
    methods: tuple[str, ...] | None,
    action: int | None,
) -> tuple[list[str], dict[str, np.ndarray], dict[str, dict[str, float]]]:
    chosen_methods = [m for m in (methods or METHOD_ORDER) if m in estimates]
    if not chosen_methods:
        raise ContractViolation(f"no estimates for methods {methods}")
    rows = {}
    for m in chosen_methods:
        row = np.asarray(estimates[m], dtype=float)
        if row.shape != (len(action_names),):
            raise ContractViolation(f"{m} estimates must cover all {len(action_names)} actions")
        if np.any(row < 0) or np.any(row > 1):
            raise ContractViolation(f"{m} estimates must lie in [0, 1]")
        rows[m] = row
    if action is not None and not 0 <= action < len(action_names):
        raise ContractViolation(f"unknown action index {action}")
    cited = {m: {action_names[i]: float(v) for i, v in enumerate(rows[m])} for m in chosen_methods}
    return chosen_methods, rows, cited


def _join(items: list[str]) -> str:
    if len(items) <= 1:
        return "".join(items)
    return ", ".join(items[:-1]) + " and " + items[-1]


def _tie_clause(ties: list[int], action_names: list[str]) -> str:
    return (
        f"{_join([action_names[i] for i in ties])} are tied;"
        f" the tie is broken in favour of the lowest action index"
    )


def explain_why(
    estimates: dict[str, np.ndarray],
    state: int,
    action: int,
    *,
    state_names: list[str],
    action_names: list[str],
    methods: tuple[str, ...] | None = None,
) -> Explanation:
    """'In state s1, I chose a_R because it has a probability of success of 86.91% ...'"""
    if not 0 <= state < len(state_names):
        raise ContractViolation(f"unknown state index {state}")
    used, rows, cited = _prepare(estimates, action_names, methods, action)
    a_name, s_name = action_names[action], state_names[state]

    values = [f"{pct(rows[m][action])} ({method_label(m)})" if len(used) > 1 else pct(rows[m][action]) for m in used]
    text = f"In state {s_name}, I chose {a_name} because it has a probability of success of {_join(values)}."

    preferred = [m for m in used if _ties(rows[m]) == [action]]
    if len(preferred) == len(used):
        text += f" {a_name} is the most promising action in {s_name}."
    else:
        for m in used:
            ties = _ties(rows[m])
            if action not in ties:
                text += f" Under the {m}-based estimate, {action_names[ties[0]]} ranks higher."
            elif len(ties) > 1:
                text += f" Under the {m}-based estimate, {_tie_clause(ties, action_names)}."

    chosen = _argmax(rows[used[0]])
    query = ExplanationQuery(kind="why", state=state, action=action, methods=tuple(used))
    debug_event("explanation_built", kind="why", state=s_name, action=a_name)
    return Explanation(text=text, cited_probabilities=cited, chosen_action=chosen, query=query)


def explain_why_not(
    estimates: dict[str, np.ndarray],
    state: int,
    action: int,
    *,
    state_names: list[str],
    action_names: list[str],
    methods: tuple[str, ...] | None = None,
) -> Explanation:
    """'I did not choose a_L because it has only a probability of success of 4.76% ...'"""
    if not 0 <= state < len(state_names):
        raise ContractViolation(f"unknown state index {state}")
    used, rows, cited = _prepare(estimates, action_names, methods, action)
    a_name, s_name = action_names[action], state_names[state]

    sentences = []
    for m in used:
        row = rows[m]
        ties = _ties(row)
        best = ties[0]
        tag = f" ({method_label(m)})" if len(used) > 1 else ""
        if ties == [action]:
            sentences.append(
                f"In state {s_name}, {a_name} is in fact the preferred action{tag}:"
                f" it has the highest probability of success, {pct(row[action])}."
            )
        elif action in ties:
            others = _join([action_names[i] for i in ties if i != action])
            sentences.append(
                f"In state {s_name}, {a_name} shares the highest probability of success{tag},"
                f" {pct(row[action])}, with {others}; the tie is broken in favour of the lowest"
                f" action index, so I chose {action_names[best]}."
            )
        else:
            sentences.append(
                f"In state {s_name}, I did not choose {a_name} because it has only a probability of success"
                f" of {pct(row[action])}{tag} compared to {pct(row[best])} for action {action_names[best]}."
            )

    chosen = _argmax(rows[used[0]])
    query = ExplanationQuery(kind="why_not", state=state, action=action, methods=tuple(used))
    debug_event("explanation_built", kind="why_not", state=s_name, action=a_name)
    return Explanation(text=" ".join(sentences), cited_probabilities=cited, chosen_action=chosen, query=query)


def explain_compare(
    estimates: dict[str, np.ndarray],
    state: int,
    *,
    state_names: list[str],
    action_names: list[str],
    methods: tuple[str, ...] | None = None,
) -> Explanation:
    """List every action's probability and name the best one (lowest index on ties)."""
    if not 0 <= state < len(state_names):
        raise ContractViolation(f"unknown state index {state}")
    used, rows, cited = _prepare(estimates, action_names, methods, None)
    s_name = state_names[state]

    lines = []
    for m in used:
        row = rows[m]
        listing = _join([f"{pct(v)} ({action_names[i]})" for i, v in enumerate(row)])
        best = _argmax(row)
        tag = f" [{method_label(m)}]" if len(used) > 1 else ""
        line = (
            f"In state {s_name} the probabilities of success are {listing}{tag}."
            f" I chose {action_names[best]} because it had the biggest probability of successfully"
            f" finishing the task."
        )
        ties = _ties(row)
        if len(ties) > 1:
            line += f" {_tie_clause(ties, action_names)}."
        lines.append(line)

    chosen = _argmax(rows[used[0]])
    query = ExplanationQuery(kind="compare", state=state, methods=tuple(used))
    debug_event("explanation_built", kind="compare", state=s_name)
    return Explanation(text="\n".join(lines), cited_probabilities=cited, chosen_action=chosen, query=query)
