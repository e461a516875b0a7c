"""Shared plain-text configuration grammar and run manifests.

Config files are `key = value` lines with `#` comments.  Values stay strings
until a consumer coerces them; command-line flags override file values.  A
manifest records the resolved configuration and every output path, and is
written only after all outputs succeeded.
"""

from __future__ import annotations

import json
import time
from pathlib import Path

__all__ = ["parse_config", "load_config", "merge_options", "write_manifest"]


def parse_config(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def load_config(path: str | Path) -> dict[str, str]:
    return parse_config(Path(path).read_text())


def merge_options(file_cfg: dict[str, str], flag_values: dict[str, object]) -> dict[str, object]:
    """File values overridden by explicitly supplied flags (non-None)."""
    merged: dict[str, object] = dict(file_cfg)
    for key, value in flag_values.items():
        if value is not None:
            merged[key] = value
    return merged


def write_manifest(path: str | Path, subcommand: str, resolved: dict, outputs: list[str],
                   seed: int, started: float) -> None:
    manifest = {
        "subcommand": subcommand,
        "config": {k: (v if isinstance(v, (int, float, str, bool, list)) else str(v))
                   for k, v in resolved.items()},
        "outputs": [str(o) for o in outputs],
        "seed": int(seed),
        "wall_time_s": time.monotonic() - started,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
