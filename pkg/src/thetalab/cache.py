"""File cache for symbol tables and built spaces.

Table files are write-once JSON with exact "num/den" strings, one file per
(curve, m), committed by atomic rename; a sha256 sidecar detects corruption.
Eviction is LRU by modification time and never touches files read or
written by the current process.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .msym.space import ManinSymbolSpace, SymbolTable

_IN_USE: set[str] = set()


class CacheError(RuntimeError):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get("THETALAB_CACHE")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "thetalab"


def table_path(cache_dir: Path, curve: str, m: int) -> Path:
    return Path(cache_dir) / curve / f"m{m:08d}.json"


def _rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def _parse_rational(s: str) -> Fraction:
    num, den = s.split("/")
    return Fraction(int(num), int(den))


def _serialize_table(table: SymbolTable) -> str:
    payload = {
        "curve": table.curve,
        "m": table.m,
        "delta": table.delta,
        "plus": {str(a): _rational(v) for a, v in sorted(table.plus.items())},
        "minus": {str(a): _rational(v) for a, v in sorted(table.minus.items())},
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def save_table(cache_dir: Path, table: SymbolTable) -> Path:
    path = table_path(cache_dir, table.curve, table.m)
    _IN_USE.add(str(path))
    if path.exists():
        return path  # write-once
    path.parent.mkdir(parents=True, exist_ok=True)
    text = _serialize_table(table)
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text)
    tmp.replace(path)
    digest = hashlib.sha256(text.encode()).hexdigest()
    side = path.with_suffix(".json.sha256")
    side_tmp = side.with_suffix(".tmp")
    side_tmp.write_text(digest + "\n")
    side_tmp.replace(side)
    return path


def load_table(cache_dir: Path, curve: str, m: int) -> SymbolTable | None:
    path = table_path(cache_dir, curve, m)
    if not path.exists():
        return None
    _IN_USE.add(str(path))
    text = path.read_text()
    side = path.with_suffix(".json.sha256")
    if side.exists():
        digest = hashlib.sha256(text.encode()).hexdigest()
        if side.read_text().strip() != digest:
            raise CacheError(f"checksum mismatch for {path}")
    data = json.loads(text)
    if data.get("curve") != curve or data.get("m") != m:
        raise CacheError(f"cache file {path} does not match its key")
    return SymbolTable(
        curve=curve,
        m=m,
        delta=int(data["delta"]),
        plus={int(a): _parse_rational(v) for a, v in data["plus"].items()},
        minus={int(a): _parse_rational(v) for a, v in data["minus"].items()},
    )


def get_table(
    space: ManinSymbolSpace,
    m: int,
    cache_dir: Path | None = None,
    offline: bool = False,
) -> SymbolTable:
    """Cached symbol table; computes and stores it unless offline."""
    if cache_dir is None:
        return space.symbol_table(m)
    cached = load_table(cache_dir, space.curve.label, m)
    if cached is not None:
        if cached.delta != space.delta:
            raise CacheError(
                f"cached delta {cached.delta} != built delta {space.delta}"
            )
        return cached
    if offline:
        raise CacheError(f"offline mode and no cached table for m={m}")
    table = space.symbol_table(m)
    save_table(cache_dir, table)
    return table


@dataclass
class GcReport:
    examined: int
    evicted: list[str]
    bytes_before: int
    bytes_after: int


def cache_gc(cache_dir: Path, max_bytes: int) -> GcReport:
    """Evict least-recently-used table files until the cache fits."""
    cache_dir = Path(cache_dir)
    if not cache_dir.exists():
        raise CacheError(f"cache directory {cache_dir} does not exist")
    entries = []
    total = 0
    for path in sorted(cache_dir.rglob("*.json")):
        side = path.with_suffix(".json.sha256")
        size = path.stat().st_size + (side.stat().st_size if side.exists() else 0)
        entries.append((path.stat().st_mtime, size, path, side))
        total += size
    entries.sort(key=lambda e: (e[0], str(e[2])))
    before = total
    evicted: list[str] = []
    for _, size, path, side in entries:
        if total <= max_bytes:
            break
        if str(path) in _IN_USE:
            continue
        path.unlink(missing_ok=True)
        side.unlink(missing_ok=True)
        evicted.append(str(path))
        total -= size
    return GcReport(
        examined=len(entries), evicted=evicted, bytes_before=before, bytes_after=total
    )


# -- space cache --------------------------------------------------------------

_SPACE_VERSION = 1


def space_path(cache_dir: Path, curve: str) -> Path:
    return Path(cache_dir) / curve / "space.json"


def save_space(cache_dir: Path, space: ManinSymbolSpace) -> Path:
    path = space_path(cache_dir, space.curve.label)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "version": _SPACE_VERSION,
        "curve": space.curve.label,
        "N": space.N,
        "delta": space.delta,
        "hecke_bound": space.hecke_bound,
        "scale_plus": _rational(space.scale_plus),
        "scale_minus": _rational(space.scale_minus),
        "al_signs": {str(e): w for e, w in sorted(space._al_cache.items())},
        "pinned_by": {str(k): v for k, v in space.pinned_by.items()},
        "values_plus": [_rational(v) for v in space.values_plus],
        "values_minus": [_rational(v) for v in space.values_minus],
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    tmp = path.with_suffix(".tmp")
    tmp.write_text(text)
    tmp.replace(path)
    digest = hashlib.sha256(text.encode()).hexdigest()
    path.with_suffix(".json.sha256").write_text(digest + "\n")
    _IN_USE.add(str(path))
    return path


def load_space(cache_dir: Path, curve) -> ManinSymbolSpace | None:
    """Rebuild a cached space; cheap structural revalidation included."""
    from .msym.p1 import P1List
    from .msym.relations import reduce_relations

    path = space_path(cache_dir, curve.label)
    if not path.exists():
        return None
    text = path.read_text()
    side = path.with_suffix(".json.sha256")
    if side.exists():
        if side.read_text().strip() != hashlib.sha256(text.encode()).hexdigest():
            raise CacheError(f"checksum mismatch for {path}")
    data = json.loads(text)
    if data.get("version") != _SPACE_VERSION or data.get("N") != curve.N:
        return None
    _IN_USE.add(str(path))
    p1 = P1List(curve.N)
    quot = reduce_relations(p1.sigma_perm(), p1.tau_perm())
    space = ManinSymbolSpace(
        curve=curve,
        p1=p1,
        quotient=quot,
        values_plus=[_parse_rational(v) for v in data["values_plus"]],
        values_minus=[_parse_rational(v) for v in data["values_minus"]],
        scale_plus=_parse_rational(data["scale_plus"]),
        scale_minus=_parse_rational(data["scale_minus"]),
        delta=int(data["delta"]),
        hecke_bound=int(data["hecke_bound"]),
        pinned_by={int(k): v for k, v in data["pinned_by"].items()},
    )
    space._al_cache = {int(e): int(w) for e, w in data["al_signs"].items()}
    curve.delta = space.delta
    curve.al_signs.update(space._al_cache)
    _revalidate(space)
    return space


def _revalidate(space: ManinSymbolSpace) -> None:
    from fractions import Fraction

    quot = space.quotient
    eta = space.p1.eta_perm()
    for values in (space.values_plus, space.values_minus):
        if len(values) != len(space.p1):
            raise CacheError("cached space has wrong length")
        for row in quot.relation_rows[:200]:
            if sum(c * values[i] for i, c in row.items()) != 0:
                raise CacheError("cached space violates a relation")
    for i in range(0, len(space.p1), 7):
        if space.values_plus[eta[i]] != space.values_plus[i]:
            raise CacheError("cached space violates the star symmetry")
        if space.values_minus[eta[i]] != -space.values_minus[i]:
            raise CacheError("cached space violates the star symmetry")


def get_space(curve, cache_dir: Path | None = None, hecke_bound: int | None = None):
    """Cached build_space."""
    from .msym.space import build_space

    if cache_dir is not None:
        try:
            cached = load_space(cache_dir, curve)
        except CacheError:
            cached = None
        if cached is not None:
            return cached
    space = build_space(curve, hecke_bound=hecke_bound)
    if cache_dir is not None:
        save_space(cache_dir, space)
    return space
