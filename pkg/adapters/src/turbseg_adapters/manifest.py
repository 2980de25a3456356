"""Run manifests: every adapter invocation records what produced its files."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from pathlib import Path


def write_manifest(
    out_dir: str | Path,
    adapter: str,
    model: str,
    parameters: dict,
    status: str = "ok",
    error: str | None = None,
) -> None:
    payload = {
        "adapter": adapter,
        "model": model,
        "parameters": parameters,
        "status": status,
        "written_at": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    if error is not None:
        payload["error"] = error
    path = Path(out_dir) / "manifest.json"
    path.write_text(json.dumps(payload, indent=2) + "\n")
