"""app.py

Thin CLI entrypoint: `python app.py train --env nav --out runs/nav`.

Keep this file small; the wiring lives in app_controller.
"""

from __future__ import annotations

from app_controller import main

if __name__ == "__main__":
    raise SystemExit(main())
