# config.py
from __future__ import annotations

import dataclasses
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from core.errors import ArtifactIOError, ConfigError

# Base directory of the repo
BASE_DIR = Path(__file__).resolve().parent.parent

CODE_VERSION = "xplain-rl 1.0.0"

# -----------------------------
# Vocabulary
# -----------------------------
ENVS = ("navigation", "sorting")
ENV_ALIASES = {"nav": "navigation", "navigation": "navigation", "sort": "sorting", "sorting": "sorting"}

SELECTIONS = ("softmax", "epsilon_greedy")

METHODS = ("memory", "learning", "introspection")

THREADS_ENV_VAR = "XPLAIN_RL_THREADS"

# -----------------------------
# Per-environment defaults
# -----------------------------
ENV_DEFAULTS: dict[str, dict[str, Any]] = {
    "navigation": dict(
        sigma=0.0,
        alpha=0.3,
        gamma=0.9,
        tau=0.25,
        epsilon=1.0,
        epsilon_decay=0.9995,
        epsilon_min=0.01,
        episodes=300,
        agents=20,
        seed=0,
        selection="softmax",
        methods=METHODS,
        step_cap=500,
        trace_states="all",
        terminal_reward=1.0,
    ),
    "sorting": dict(
        sigma=0.0,
        alpha=0.3,
        gamma=0.9,
        tau=0.25,
        epsilon=1.0,
        # 0.9995 is the deep variant's rate; tabular runs are 2000 episodes long
        epsilon_decay=0.995,
        epsilon_min=0.01,
        episodes=2000,
        agents=5,
        seed=0,
        selection="epsilon_greedy",
        methods=METHODS,
        step_cap=100,
        trace_states="initial",
        # optimal cumulative return; a final-step reward of 1 saturates the clamp
        terminal_reward=3.0,
    ),
}

# Analysis defaults
SAVGOL_WINDOW = 15
SAVGOL_ORDER = 3
NOISE_MEAN = 1.0
NOISE_SD = 0.2


# -----------------------------
# Column names (single source of truth)
# -----------------------------
@dataclass(frozen=True)
class TraceCols:
    agent: str = "agent"
    episode: str = "episode"
    state: str = "state"
    action: str = "action"
    method: str = "method"
    value: str = "value"


C = TraceCols()
TRACE_COLUMNS = [C.agent, C.episode, C.state, C.action, C.method, C.value]


# -----------------------------
# Experiment config
# -----------------------------
@dataclass(frozen=True)
class ExperimentConfig:
    env: str = "navigation"
    sigma: float = 0.0
    alpha: float = 0.3
    gamma: float = 0.9
    tau: float = 0.25
    epsilon: float = 1.0
    epsilon_decay: float = 0.9995
    epsilon_min: float = 0.01
    episodes: int = 300
    agents: int = 20
    seed: int = 0
    selection: str = "softmax"
    methods: tuple[str, ...] = field(default=METHODS)
    step_cap: int = 500
    trace_states: str = "all"
    terminal_reward: float = 1.0

    def __post_init__(self) -> None:
        env = ENV_ALIASES.get(str(self.env).strip().lower())
        if env is None:
            raise ConfigError(f"unknown env '{self.env}' (expected one of {', '.join(ENVS)})", field="env")
        object.__setattr__(self, "env", env)
        object.__setattr__(self, "methods", tuple(self.methods))

        for name in ("sigma", "alpha", "gamma", "tau", "epsilon", "epsilon_decay", "epsilon_min", "terminal_reward"):
            v = getattr(self, name)
            if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(float(v)):
                raise ConfigError(f"must be a finite number, got {v!r}", field=name)
            object.__setattr__(self, name, float(v))

        _check(0.0 < self.alpha <= 1.0, "alpha", "must be in (0, 1]")
        _check(0.0 < self.gamma <= 1.0, "gamma", "must be in (0, 1]")
        _check(self.tau > 0.0, "tau", "must be > 0")
        _check(0.0 < self.epsilon <= 1.0, "epsilon", "must be in (0, 1]")
        _check(0.0 < self.epsilon_decay <= 1.0, "epsilon_decay", "must be in (0, 1]")
        _check(0.0 <= self.epsilon_min <= 1.0, "epsilon_min", "must be in [0, 1]")
        _check(0.0 <= self.sigma <= 1.0, "sigma", "must be in [0, 1]")
        _check(self.terminal_reward > 0.0, "terminal_reward", "must be > 0")

        for name in ("episodes", "agents", "step_cap", "seed"):
            v = getattr(self, name)
            if not isinstance(v, int) or isinstance(v, bool):
                raise ConfigError(f"must be an integer, got {v!r}", field=name)
        _check(self.episodes > 0, "episodes", "must be positive")
        _check(self.agents > 0, "agents", "must be positive")
        _check(self.step_cap > 0, "step_cap", "must be positive")
        _check(-(2**63) <= self.seed < 2**64, "seed", "must fit in 64 bits")

        _check(self.selection in SELECTIONS, "selection", f"must be one of {', '.join(SELECTIONS)}")
        _check(len(self.methods) > 0, "methods", "at least one method is required")
        bad = [m for m in self.methods if m not in METHODS]
        _check(not bad, "methods", f"unknown method(s) {bad}")
        _check(len(set(self.methods)) == len(self.methods), "methods", "duplicate method")
        if "introspection" in self.methods:
            # log base gamma must exist
            _check(self.gamma < 1.0, "gamma", "introspection needs gamma < 1")

    def with_overrides(self, **kw: Any) -> "ExperimentConfig":
        return dataclasses.replace(self, **kw)

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown keys {unknown}")
        kw = dict(d)
        if "methods" in kw:
            kw["methods"] = tuple(kw["methods"])
        return cls(**kw)


def _check(ok: bool, field_name: str, message: str) -> None:
    if not ok:
        raise ConfigError(message, field=field_name)


def default_config(env: str = "navigation", **overrides: Any) -> ExperimentConfig:
    """Default config for an environment, with optional overrides."""
    name = ENV_ALIASES.get(str(env).strip().lower())
    if name is None:
        raise ConfigError(f"unknown env '{env}'", field="env")
    params = dict(ENV_DEFAULTS[name])
    params.update(overrides)
    return ExperimentConfig(env=name, **params)


# -----------------------------
# key = value config files
# -----------------------------
_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
_BASE_PREFIX = re.compile(r"^[+-]?0[xXoObB]")


def _coerce(key: str, raw: str, line: int) -> Any:
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            # base prefixes (0x, 0o, 0b) only when present; "007" stays decimal
            return int(raw, 0) if _BASE_PREFIX.match(raw) else int(raw)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"cannot parse '{raw}' as {kind}", line=line, field=key) from None
    if key == "methods":
        return tuple(m.strip().lower() for m in raw.split(",") if m.strip())
    return raw.strip()


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse flat `key = value` lines. Missing keys take the env's defaults."""
    values: dict[str, Any] = {}
    lines_by_key: dict[str, int] = {}

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        s = raw_line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, raw = (p.strip() for p in s.split("=", 1))
        key = key.lower()
        if key not in _FIELD_TYPES:
            raise ConfigError("unknown key", line=lineno, field=key)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines_by_key[key]})", line=lineno, field=key)
        if raw == "":
            raise ConfigError("empty value", line=lineno, field=key)
        values[key] = _coerce(key, raw, lineno)
        lines_by_key[key] = lineno

    env = values.pop("env", "navigation")
    try:
        return default_config(env, **values)
    except ConfigError as e:
        if e.field and e.field in lines_by_key and e.line is None:
            raise ConfigError(str(e).split(": ", 1)[-1], line=lines_by_key[e.field], field=e.field) from None
        raise


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ArtifactIOError(f"cannot read config {path}: {e}") from e
    return parse_config_text(text)


def config_to_text(cfg: ExperimentConfig) -> str:
    """Inverse of parse_config_text."""
    out = []
    for k, v in cfg.to_dict().items():
        if isinstance(v, list):
            v = ",".join(v)
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"


def max_threads() -> int:
    """Concurrent agent cap from XPLAIN_RL_THREADS, else available parallelism."""
    raw = os.environ.get(THREADS_ENV_VAR, "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got '{raw}'") from None
        if n < 1:
            raise ConfigError(f"{THREADS_ENV_VAR} must be >= 1")
        return n
    return os.cpu_count() or 1
