"""Run configuration: CLI defaults from a key = value config file.

Grammar (documented in the README): one `key = value` pair per line,
`#` comments, blank lines ignored.  Values: integers, floats, booleans
(true/false), quoted or bare strings, and comma-separated lists of these.
Keys mirror the command-line flag names with dashes replaced by
underscores.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    curve: str | None = None
    command: str | None = None
    max_cond: int | None = None
    degrees: list[int] = field(default_factory=list)
    sign: str = "plus"
    params: str | None = None
    cache_dir: str | None = None
    out_dir: str = "."
    threads: int = 1
    offline: bool = False
    deterministic: bool = True  # always on; recorded for provenance


def _parse_scalar(text: str):
    text = text.strip()
    if not text:
        raise ConfigError("empty value")
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        return text[1:-1]
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = line.split("=", 1)
        key = key.strip().replace("-", "_")
        if not key.isidentifier():
            raise ConfigError(f"line {lineno}: bad key {key!r}")
        value = value.strip()
        if "," in value:
            out[key] = [_parse_scalar(v) for v in value.split(",") if v.strip()]
        else:
            out[key] = _parse_scalar(value)
    return out


def load_config(path: str | Path) -> dict:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file {p} does not exist")
    return parse_config_text(p.read_text())
