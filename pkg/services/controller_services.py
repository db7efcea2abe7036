"""controller_services.py

The work behind each CLI subcommand. Keep argparse and exit codes out of
this file; app_controller handles those.
"""

from __future__ import annotations

import logging
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd

from analysis.stats import savgol
from analysis.traces import StateAnalysis, analyze_state, key_label
from core.config import CODE_VERSION, SAVGOL_WINDOW, C, ExperimentConfig, default_config, load_config
from core.errors import ConfigError, DataMismatchError
from core.experiment import run_experiment, seeded_rng
from debug.debug_tools import debug_event
from envs.registry import action_index, make_env, state_index
from narrate.templates import Explanation, explain_compare, explain_why, explain_why_not
from services import artifacts
from views.report_view import render_analysis_report, render_run_report
from views.svg_charts import heatmap_svg, line_chart_svg

logger = logging.getLogger(__name__)


# -------------------------
# train
# -------------------------

@dataclass
class RunManifest:
    config: dict[str, Any]
    paths: dict[str, str] = field(default_factory=dict)
    duration_s: float = 0.0
    code_version: str = CODE_VERSION

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def train(config: ExperimentConfig, out_dir: str | Path, *, threads: int | None = None) -> RunManifest:
    t0 = time.perf_counter()
    runs = run_experiment(config, threads=threads)
    paths = artifacts.write_run(out_dir, config, runs)
    manifest = RunManifest(
        config=config.to_dict(),
        paths={k: str(p) for k, p in paths.items()},
        duration_s=time.perf_counter() - t0,
    )
    manifest.paths["manifest"] = str(artifacts.write_manifest(out_dir, manifest.to_dict()))
    return manifest


def cmd_train(
    config_path: str | Path | None,
    out_dir: str | Path,
    *,
    env: str | None = None,
    overrides: dict[str, Any] | None = None,
    threads: int | None = None,
) -> RunManifest:
    """Load (or default) a config, apply CLI overrides, train, write artifacts."""
    if config_path is not None:
        config = load_config(config_path)
        if env is not None and default_config(env).env != config.env:
            raise ConfigError(f"--env {env} contradicts the config file's env '{config.env}'", field="env")
    else:
        config = default_config(env or "navigation")
    if overrides:
        config = config.with_overrides(**overrides)
    return train(config, out_dir, threads=threads)


# -------------------------
# analyze
# -------------------------

# runs may differ only in these config fields
POOLABLE_FIELDS = frozenset({"seed", "agents"})


def load_aligned_traces(run_dirs: list[str | Path]) -> tuple[pd.DataFrame, artifacts.RunSummary]:
    """Concatenate several runs' traces; agents are renumbered so they stay distinct."""
    if not run_dirs:
        raise DataMismatchError("analyze needs at least one run directory")
    frames = []
    first = None
    offset = 0
    for run_dir in run_dirs:
        summary = artifacts.read_summary(run_dir)
        frame = artifacts.read_traces(run_dir)
        if first is None:
            first = summary
        else:
            a, b = first.config.to_dict(), summary.config.to_dict()
            differing = [k for k in a if k not in POOLABLE_FIELDS and a[k] != b[k]]
            if differing:
                detail = ", ".join(f"{k} {a[k]} vs {b[k]}" for k in differing)
                raise DataMismatchError(f"runs cannot be aligned: {detail} ({run_dir})")
        n_ep = int(frame[C.episode].max()) + 1 if len(frame) else 0
        if n_ep != summary.config.episodes:
            raise DataMismatchError(f"{run_dir}: traces cover {n_ep} episodes, summary says {summary.config.episodes}")
        frame = frame.copy()
        frame[C.agent] = frame[C.agent] + offset
        offset = int(frame[C.agent].max()) + 1
        frames.append(frame)
    return pd.concat(frames, ignore_index=True), first


def _initial_state_name(config: ExperimentConfig) -> str:
    env = make_env(config)
    return env.state_names[env.initial_state]


def _chart_name(state_names: list[str], state: str) -> str:
    return f"state{state_names.index(state)}"


def _trace_charts(res: StateAnalysis, tag: str, *, smooth: bool) -> dict[str, str]:
    """One chart per method, one line per action."""
    charts = {}
    for method, by_action in res.mean.items():
        series = {}
        for action, trace in by_action.items():
            if smooth and len(trace) >= SAVGOL_WINDOW:
                trace = np.clip(savgol(trace), 0.0, 1.0)
            series[key_label(action, method)] = trace
        title = f"{method}-based probability of success, state {res.state}"
        if smooth:
            title += " (smoothed)"
        charts[f"trace_{method}_{tag}.svg"] = line_chart_svg(title, series)
    return charts


def cmd_analyze(
    run_dirs: list[str | Path],
    out_dir: str | Path | None = None,
    *,
    per_agent: bool = False,
    smooth: bool = False,
    states: list[str] | None = None,
) -> dict[str, Path]:
    """MSE table, correlation matrix, text report and SVG charts for one or more runs."""
    frame, summary = load_aligned_traces(run_dirs)
    config = summary.config
    out = Path(out_dir) if out_dir is not None else Path(run_dirs[0]) / "analysis"

    present = [s for s in pd.unique(frame[C.state])]
    if states:
        picked = [summary.state_names[state_index(config.env, s)] for s in states]
        missing = [s for s in picked if s not in present]
        if missing:
            raise DataMismatchError(f"no traces recorded for states {missing}")
        present = picked

    initial = _initial_state_name(config)
    present.sort(key=lambda s: (s != initial, summary.state_names.index(s)))

    rng = seeded_rng(config.seed)
    analyses = [analyze_state(frame, s, rng=rng, per_agent=per_agent) for s in present]

    paths: dict[str, Path] = {}
    mse_frames = {a.state: a.mse for a in analyses if a.mse is not None}
    if mse_frames:
        mse_all = pd.concat(mse_frames, names=["state"]).reset_index()
        paths["mse_table"] = out / "mse_table.csv"
        artifacts.write_csv(paths["mse_table"], mse_all)

    corr_frames = {a.state: a.correlation.to_frame() for a in analyses if a.correlation is not None}
    if corr_frames:
        corr_all = pd.concat(corr_frames, names=["state", "label"]).reset_index()
        paths["correlation_matrix"] = out / "correlation_matrix.csv"
        artifacts.write_csv(paths["correlation_matrix"], corr_all)
        head = next(a for a in analyses if a.correlation is not None)
        paths["correlation_svg"] = out / "correlation_matrix.svg"
        artifacts.write_text(
            paths["correlation_svg"],
            heatmap_svg(f"Pearson correlation, state {head.state}", head.correlation.labels, head.correlation.values),
        )

    report = render_analysis_report(
        env=config.env,
        sigma=config.sigma,
        agents=int(frame[C.agent].nunique()),
        episodes=config.episodes,
        analyses=analyses,
        per_agent=per_agent,
    )
    paths["report"] = out / "report.txt"
    artifacts.write_text(paths["report"], report)

    for res in analyses:
        for name, svg in _trace_charts(res, _chart_name(summary.state_names, res.state), smooth=smooth).items():
            paths[name] = out / name
            artifacts.write_text(paths[name], svg)

    usage = artifacts.read_memory_usage(run_dirs[0])
    cols = [c for c in usage.columns if c != "episode"]
    if cols:
        paths["memory_usage_svg"] = out / "memory_usage.svg"
        artifacts.write_text(
            paths["memory_usage_svg"],
            line_chart_svg(
                "storage cells per estimator",
                {c: usage[c].to_numpy(dtype=float) for c in cols},
                y_label="cells",
                y_range=None,
            ),
        )

    debug_event("analysis_finished", level="info", out_dir=str(out), states=len(analyses), files=len(paths))
    return paths


# -------------------------
# explain / report
# -------------------------

def build_explanation(
    summary: artifacts.RunSummary,
    kind: str,
    state: str,
    action: str | None = None,
    *,
    methods: tuple[str, ...] | None = None,
) -> Explanation:
    env_name = summary.config.env
    s = state_index(env_name, state)
    estimates = {m: summary.final_probs[m][s] for m in summary.final_probs}
    if methods:
        unknown = [m for m in methods if m not in estimates]
        if unknown:
            raise DataMismatchError(f"run has no final estimates for {unknown}")
    names = dict(state_names=summary.state_names, action_names=summary.action_names, methods=methods)

    if kind == "compare":
        if action is not None:
            raise DataMismatchError("compare takes no action")
        return explain_compare(estimates, s, **names)
    if action is None:
        raise DataMismatchError(f"'{kind}' needs an action")
    a = action_index(env_name, action)
    if kind == "why":
        return explain_why(estimates, s, a, **names)
    if kind == "why_not":
        return explain_why_not(estimates, s, a, **names)
    raise DataMismatchError(f"unknown explanation kind '{kind}'")


def cmd_explain(
    run_dir: str | Path,
    kind: str,
    state: str,
    action: str | None = None,
    *,
    methods: tuple[str, ...] | None = None,
    as_json: bool = False,
) -> str:
    """Explanation text built from the run's final (agent-mean) estimates."""
    exp = build_explanation(artifacts.read_summary(run_dir), kind, state, action, methods=methods)
    return exp.to_json() + "\n" if as_json else exp.text + "\n"


def cmd_report(run_dir: str | Path, *, max_states: int = 12) -> str:
    summary = artifacts.read_summary(run_dir)
    episodes = artifacts.read_episodes(run_dir)
    return render_run_report(summary, episodes, max_states=max_states)
