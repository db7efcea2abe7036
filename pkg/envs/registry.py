"""registry.py

Environment factory and human-readable state/action name lookup.
"""

from __future__ import annotations

from core.config import ExperimentConfig
from core.errors import ConfigError, DataMismatchError
from core.mdp import Environment
from envs.nav import NavEnv
from envs.sort import SortEnv


def make_env(config: ExperimentConfig) -> Environment:
    if config.env == "navigation":
        return NavEnv(sigma=config.sigma)
    if config.env == "sorting":
        return SortEnv()
    raise ConfigError(f"unknown env '{config.env}'", field="env")


def state_names_for(env_name: str) -> list[str]:
    if env_name == "navigation":
        return list(NavEnv.state_names)
    return list(SortEnv().state_names)


def action_names_for(env_name: str) -> list[str]:
    return list(NavEnv.action_names if env_name == "navigation" else SortEnv.action_names)


def _lookup(token: str, names: list[str], what: str) -> int:
    t = str(token).strip()
    if t in names:
        return names.index(t)
    lowered = [n.lower() for n in names]
    if t.lower() in lowered:
        return lowered.index(t.lower())
    if t.isdigit() and int(t) < len(names):
        return int(t)
    raise DataMismatchError(f"unknown {what} '{token}'")


def state_index(env_name: str, token: str) -> int:
    """'s1' (navigation), a sorting state label, or a bare index."""
    return _lookup(token, state_names_for(env_name), "state")


def action_index(env_name: str, token: str) -> int:
    """'a_R' / 'R' (navigation) or 'grab', 'move_left', ... (sorting)."""
    names = action_names_for(env_name)
    t = str(token).strip()
    if env_name == "navigation" and t.upper() in ("L", "R", "S"):
        t = f"a_{t.upper()}"
    return _lookup(t, names, "action")


def resolve_trace_states(config: ExperimentConfig, env: Environment) -> list[int]:
    spec = config.trace_states.strip().lower()
    if spec == "all":
        return list(range(env.state_count))
    if spec == "initial":
        return [env.initial_state]
    try:
        picked = [state_index(config.env, tok) for tok in config.trace_states.split(",") if tok.strip()]
    except DataMismatchError as e:
        raise ConfigError(str(e), field="trace_states") from None
    if not picked:
        raise ConfigError("no states listed", field="trace_states")
    return sorted(set(picked))
