"""debug_tools.py

Logging setup and structured run events.

`debug_event("agent_finished", agent=3, episodes=300)` logs
`agent_finished agent=3 episodes=300` so runs can be grepped by event name.
"""

from __future__ import annotations

import logging
import sys
from typing import Any

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_events_logger = logging.getLogger("xplain.events")


def configure_logging(verbosity: int = 0) -> None:
    """Configure the root logger once. verbosity: -1 quiet, 0 normal, 1+ debug."""
    if verbosity >= 1:
        level = logging.DEBUG
    elif verbosity <= -1:
        level = logging.WARNING
    else:
        level = logging.INFO

    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    s = str(v)
    return f'"{s}"' if " " in s else s


def debug_event(event: str, *, level: str = "debug", **fields: Any) -> None:
    """Log one structured event line."""
    lvl = logging.INFO if level == "info" else logging.DEBUG
    if not _events_logger.isEnabledFor(lvl):
        return
    parts = [event] + [f"{k}={_fmt(v)}" for k, v in fields.items()]
    _events_logger.log(lvl, " ".join(parts))
