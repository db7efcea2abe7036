"""app_controller.py

Command-line wiring: argparse subcommands -> services, exceptions -> exit codes.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Any, Sequence

from core.config import CODE_VERSION, ENV_ALIASES, METHODS, SELECTIONS
from core.errors import EXIT_OK, ConfigError, XplainError
from debug.debug_tools import configure_logging
from narrate.templates import KINDS
from services.controller_services import cmd_analyze, cmd_explain, cmd_report, cmd_train

logger = logging.getLogger(__name__)

# --flag -> ExperimentConfig field, with its parser
TRAIN_OVERRIDES: dict[str, Any] = {
    "sigma": float,
    "alpha": float,
    "gamma": float,
    "tau": float,
    "epsilon": float,
    "epsilon_decay": float,
    "epsilon_min": float,
    "episodes": int,
    "agents": int,
    "seed": int,
    "step_cap": int,
    "terminal_reward": float,
}


def _methods(raw: str) -> tuple[str, ...]:
    out = tuple(m.strip().lower() for m in raw.split(",") if m.strip())
    bad = [m for m in out if m not in METHODS]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)}")
    return out


# -------------------------
# Subcommand handlers
# -------------------------

def _run_train(args: argparse.Namespace) -> int:
    overrides = {k: getattr(args, k) for k in TRAIN_OVERRIDES if getattr(args, k) is not None}
    if args.selection is not None:
        overrides["selection"] = args.selection
    if args.methods is not None:
        overrides["methods"] = args.methods
    if args.trace_states is not None:
        overrides["trace_states"] = args.trace_states
    manifest = cmd_train(args.config, args.out, env=args.env, overrides=overrides, threads=args.threads)
    print(f"trained {manifest.config['agents']} agents x {manifest.config['episodes']} episodes "
          f"in {manifest.duration_s:.1f}s")
    for name, path in manifest.paths.items():
        print(f"  {name:<18} {path}")
    return EXIT_OK


def _run_analyze(args: argparse.Namespace) -> int:
    paths = cmd_analyze(
        args.run_dirs,
        args.out,
        per_agent=args.per_agent,
        smooth=args.smooth,
        states=args.states.split(",") if args.states else None,
    )
    for name, path in paths.items():
        print(f"  {name:<24} {path}")
    return EXIT_OK


def _run_explain(args: argparse.Namespace) -> int:
    if args.kind == "compare" and args.action is not None:
        raise ConfigError("compare takes a state only", field="action")
    if args.kind != "compare" and args.action is None:
        raise ConfigError(f"'{args.kind}' needs an action", field="action")
    text = cmd_explain(args.run_dir, args.kind, args.state, args.action, methods=args.methods, as_json=args.json)
    sys.stdout.write(text)
    return EXIT_OK


def _run_report(args: argparse.Namespace) -> int:
    sys.stdout.write(cmd_report(args.run_dir, max_states=args.max_states))
    return EXIT_OK


# -------------------------
# Parser
# -------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="xplain-rl",
        description="Train tabular SARSA agents and explain their decisions with success probabilities.",
    )
    parser.add_argument("--version", action="version", version=CODE_VERSION)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings and errors only")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="run an experiment and write its artifacts")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--env", choices=sorted(ENV_ALIASES), help="environment when no config file is given")
    p.add_argument("--out", required=True, help="run directory to write")
    p.add_argument("--threads", type=int, help="concurrent agents (overrides XPLAIN_RL_THREADS)")
    for name, kind in TRAIN_OVERRIDES.items():
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind)
    p.add_argument("--selection", choices=SELECTIONS)
    p.add_argument("--methods", type=_methods, help="comma list of memory,learning,introspection")
    p.add_argument("--trace-states", dest="trace_states", help="all, initial, or a comma list of states")
    p.set_defaults(func=_run_train)

    p = sub.add_parser("analyze", help="MSE / correlation report and charts for run directories")
    p.add_argument("run_dirs", nargs="+")
    p.add_argument("--out", help="output directory (default: <first run>/analysis)")
    p.add_argument("--per-agent", dest="per_agent", action="store_true", help="average per-agent MSE")
    p.add_argument("--smooth", action="store_true", help="Savitzky-Golay smoothing for charts")
    p.add_argument("--states", help="comma list of states to analyze (default: every traced state)")
    p.set_defaults(func=_run_analyze)

    p = sub.add_parser("explain", help="why / why_not / compare explanation from a run")
    p.add_argument("run_dir")
    p.add_argument("kind", choices=KINDS)
    p.add_argument("state", help="s0..s5, a sorting state label, or an index")
    p.add_argument("action", nargs="?", help="a_L/a_R/a_S (or L/R/S), grab, drop, move_left, move_right")
    p.add_argument("--methods", type=_methods)
    p.add_argument("--json", action="store_true", help="emit JSON with the cited probabilities")
    p.set_defaults(func=_run_explain)

    p = sub.add_parser("report", help="print a run summary")
    p.add_argument("run_dir")
    p.add_argument("--max-states", dest="max_states", type=int, default=12)
    p.set_defaults(func=_run_report)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(1 if args.verbose else -1 if args.quiet else 0)
    try:
        return args.func(args)
    except XplainError as e:
        print(f"error: {e}", file=sys.stderr)
        logger.debug("command failed", exc_info=True)
        return e.exit_code
