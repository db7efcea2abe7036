"""artifacts.py

Run directory persistence: CSV tables, summary.json and friends.

All files are UTF-8 with LF line endings. OSError is re-raised as
ArtifactIOError; structurally wrong files raise DataMismatchError.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from analysis.traces import runs_to_frame, validate_trace_frame
from core.config import CODE_VERSION, TRACE_COLUMNS, ExperimentConfig
from core.errors import ArtifactIOError, ConfigError, DataMismatchError
from debug.debug_tools import debug_event
from envs.nav import transition_table_json

logger = logging.getLogger(__name__)

TRACES = "traces.csv"
QTABLE = "qtable.csv"
PTABLE = "ptable.csv"
SUMMARY = "summary.json"
EPISODES = "episodes.csv"
MEMORY_USAGE = "memory_usage.csv"
TRANSITIONS = "transition_table.json"
MANIFEST = "manifest.json"

TABLE_COLUMNS = ["agent", "state", "action", "value"]
LAST_N_RETURN = 50


# -------------------------
# Low-level helpers
# -------------------------

def write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as e:
        raise ArtifactIOError(f"cannot write {path}: {e}") from e


def write_csv(path: Path, df: pd.DataFrame) -> None:
    write_text(path, df.to_csv(index=False, lineterminator="\n"))


def _read_csv(path: Path) -> pd.DataFrame:
    if not path.exists():
        raise DataMismatchError(f"missing artifact {path}")
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e}") from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise DataMismatchError(f"malformed {path}: {e}") from e


def _read_json(path: Path) -> dict[str, Any]:
    if not path.exists():
        raise DataMismatchError(f"missing artifact {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ArtifactIOError(f"cannot read {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise DataMismatchError(f"malformed {path}: {e}") from e


def _dump_json(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _table_frame(runs, pick) -> pd.DataFrame:
    """Long (agent, state, action, value) frame from a per-run (S, A) array."""
    parts = []
    for run in runs:
        arr = pick(run)
        s_idx, a_idx = np.indices(arr.shape)
        parts.append(
            pd.DataFrame(
                {
                    "agent": run.agent,
                    "state": np.asarray(run.state_names, dtype=object)[s_idx.ravel()],
                    "action": np.asarray(run.action_names, dtype=object)[a_idx.ravel()],
                    "value": arr.ravel(),
                }
            )
        )
    return pd.concat(parts, ignore_index=True)[TABLE_COLUMNS]


# -------------------------
# Summary
# -------------------------

def build_summary(config: ExperimentConfig, runs) -> dict[str, Any]:
    """Config echo, agent-mean final tables, memory counters and run statistics."""
    first = runs[0]
    log = pd.concat([r.episode_log for r in runs], ignore_index=True)
    last = log[log["episode"] >= config.episodes - LAST_N_RETURN]

    per_agent = (
        log.groupby("agent")
        .agg(success_rate=("outcome", lambda s: float((s == "success").mean())), mean_length=("length", "mean"))
        .reset_index()
    )
    per_agent["last50_mean_return"] = last.groupby("agent")["return"].mean().reindex(per_agent["agent"]).to_numpy()

    summary: dict[str, Any] = {
        "code_version": CODE_VERSION,
        "config": config.to_dict(),
        "env": config.env,
        "state_names": list(first.state_names),
        "action_names": list(first.action_names),
        "agents": len(runs),
        "episodes": config.episodes,
        "final_q": np.mean([r.final_q for r in runs], axis=0).tolist(),
        "final_probs": {
            m: np.mean([r.final_probs[m] for r in runs], axis=0).tolist() for m in first.final_probs
        },
        "memory_usage": {
            m: float(np.mean([r.memory_usage[m] for r in runs])) for m in first.memory_usage
        },
        "success_rate": float((log["outcome"] == "success").mean()),
        "last50_mean_return": float(last["return"].mean()),
        "per_agent": [
            {
                "agent": int(row.agent),
                "success_rate": float(row.success_rate),
                "mean_length": float(row.mean_length),
                "last50_mean_return": float(row.last50_mean_return),
            }
            for row in per_agent.itertuples(index=False)
        ],
    }
    if first.memory_counts:
        summary["memory_counts"] = {
            k: np.sum([r.memory_counts[k] for r in runs], axis=0).astype(int).tolist()
            for k in ("t_total", "t_success")
        }
    return summary


@dataclass
class RunSummary:
    """summary.json as read back from disk."""

    config: ExperimentConfig
    code_version: str
    state_names: list[str]
    action_names: list[str]
    final_q: np.ndarray
    final_probs: dict[str, np.ndarray]
    memory_usage: dict[str, float]
    success_rate: float
    last50_mean_return: float
    memory_counts: dict[str, np.ndarray] = field(default_factory=dict)
    raw: dict[str, Any] = field(default_factory=dict)


def parse_summary(d: dict[str, Any]) -> RunSummary:
    try:
        config = ExperimentConfig.from_dict(d["config"])
        s_names, a_names = list(d["state_names"]), list(d["action_names"])
        final_q = np.asarray(d["final_q"], dtype=float)
        final_probs = {m: np.asarray(v, dtype=float) for m, v in d["final_probs"].items()}
        counts = {k: np.asarray(v, dtype=np.int64) for k, v in d.get("memory_counts", {}).items()}
        out = RunSummary(
            config=config,
            code_version=str(d["code_version"]),
            state_names=s_names,
            action_names=a_names,
            final_q=final_q,
            final_probs=final_probs,
            memory_usage={k: float(v) for k, v in d["memory_usage"].items()},
            success_rate=float(d["success_rate"]),
            last50_mean_return=float(d["last50_mean_return"]),
            memory_counts=counts,
            raw=d,
        )
    except ConfigError as e:
        raise DataMismatchError(f"summary config is invalid: {e}") from e
    except (KeyError, TypeError, ValueError) as e:
        raise DataMismatchError(f"summary.json is incomplete: {e!r}") from e

    shape = (len(s_names), len(a_names))
    for name, arr in [("final_q", final_q), *final_probs.items()]:
        if arr.shape != shape:
            raise DataMismatchError(f"summary table '{name}' has shape {arr.shape}, expected {shape}")
    return out


# -------------------------
# Write / read a run directory
# -------------------------

def write_run(out_dir: str | Path, config: ExperimentConfig, runs) -> dict[str, Path]:
    """Write every artifact of a finished experiment; returns {name: path}."""
    out = Path(out_dir)
    paths: dict[str, Path] = {}

    frame = runs_to_frame(runs)
    paths["traces"] = out / TRACES
    write_csv(paths["traces"], frame)

    paths["qtable"] = out / QTABLE
    write_csv(paths["qtable"], _table_frame(runs, lambda r: r.final_q))

    if "learning" in config.methods:
        paths["ptable"] = out / PTABLE
        write_csv(paths["ptable"], _table_frame(runs, lambda r: r.final_probs["learning"]))

    paths["summary"] = out / SUMMARY
    write_text(paths["summary"], _dump_json(build_summary(config, runs)))

    paths["episodes"] = out / EPISODES
    write_csv(paths["episodes"], pd.concat([r.episode_log for r in runs], ignore_index=True))

    usage = pd.DataFrame(
        {m: np.mean([r.memory_usage_trace[m] for r in runs], axis=0) for m in runs[0].memory_usage_trace}
    )
    usage.insert(0, "episode", np.arange(config.episodes))
    paths["memory_usage"] = out / MEMORY_USAGE
    write_csv(paths["memory_usage"], usage)

    if config.env == "navigation":
        paths["transition_table"] = out / TRANSITIONS
        write_text(paths["transition_table"], transition_table_json() + "\n")

    debug_event("artifacts_written", level="info", out_dir=str(out), files=len(paths))
    return paths


def write_manifest(out_dir: str | Path, manifest: dict[str, Any]) -> Path:
    path = Path(out_dir) / MANIFEST
    write_text(path, _dump_json(manifest))
    return path


def read_traces(run_dir: str | Path) -> pd.DataFrame:
    frame = _read_csv(Path(run_dir) / TRACES)
    validate_trace_frame(frame)
    return frame[TRACE_COLUMNS]


def read_summary(run_dir: str | Path) -> RunSummary:
    return parse_summary(_read_json(Path(run_dir) / SUMMARY))


def read_table(run_dir: str | Path, name: str = QTABLE) -> pd.DataFrame:
    df = _read_csv(Path(run_dir) / name)
    missing = [c for c in TABLE_COLUMNS if c not in df.columns]
    if missing:
        raise DataMismatchError(f"{name} is missing columns {missing}")
    return df


def read_episodes(run_dir: str | Path) -> pd.DataFrame:
    return _read_csv(Path(run_dir) / EPISODES)


def read_memory_usage(run_dir: str | Path) -> pd.DataFrame:
    return _read_csv(Path(run_dir) / MEMORY_USAGE)
