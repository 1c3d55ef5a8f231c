"""On-disk tables: gd_table.json and pkl_table.json.

Writes go through a temporary file and an atomic rename.  A file that fails
to parse, carries another schema version, or does not satisfy the defining
relations is ignored with a CacheWarning and the table is recomputed.
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings
from pathlib import Path

from . import gelfand_dickey as gd
from .diffpoly import DiffPoly, dx

SCHEMA_VERSION = 1
GD_FILE = "gd_table.json"
PKL_FILE = "pkl_table.json"
ENV_VAR = "KDVGRAV_CACHE_DIR"


class CacheWarning(UserWarning):
    pass


def default_cache_dir() -> Path:
    env = os.environ.get(ENV_VAR)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "kdvgrav"


def dumps(obj) -> str:
    return json.dumps(obj, indent=1) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- gd_table ------------------------------------------------------------------


def table_to_json_obj(table: gd.GDTable) -> dict:
    return {
        "schema": SCHEMA_VERSION,
        "kind": "gd_table",
        "max_n": table.max_n,
        "normalization": table.normalization,
        "entries": [
            {"n": n, "R": r.to_json_obj(), "T": t.to_json_obj()} for n, r, t in table.entries
        ],
    }


def table_from_json_obj(obj) -> gd.GDTable:
    if obj.get("schema") != SCHEMA_VERSION or obj.get("kind") != "gd_table":
        raise ValueError(f"unsupported schema {obj.get('schema')!r}/{obj.get('kind')!r}")
    entries = []
    for i, e in enumerate(obj["entries"]):
        if e["n"] != i:
            raise ValueError("entries are not contiguous from 0")
        entries.append((i, DiffPoly.from_json_obj(e["R"]), DiffPoly.from_json_obj(e["T"])))
    if len(entries) != obj["max_n"] + 1:
        raise ValueError("max_n does not match the number of entries")
    table = gd.GDTable(obj["max_n"], entries, obj.get("normalization", gd.NORMALIZATION))
    validate_table(table)
    return table


def validate_table(table: gd.GDTable) -> None:
    """Check the relations that pin the table down uniquely."""
    if not table.entries:
        raise ValueError("empty table")
    _, r0, t0 = table.entries[0]
    if r0 != gd.ONE or t0 != gd.U:
        raise ValueError("R_0 = 1, T_0 = u violated")
    for n, r, t in table.entries:
        if (n and r.constant_term()) or t.constant_term():
            raise ValueError(f"entry {n} has a constant term")
        if dx(t) != gd.U1 * r:
            raise ValueError(f"dx T_{n} != u_1 R_{n}")
        if n and dx(r) != gd.lenard_rhs(table.entries[n - 1][1], n - 1):
            raise ValueError(f"Lenard relation fails at n = {n}")


def read_table(path: Path) -> gd.GDTable | None:
    path = Path(path)
    if not path.exists():
        return None
    try:
        return table_from_json_obj(json.loads(path.read_text(encoding="utf-8")))
    except Exception as exc:
        warnings.warn(f"ignoring cache {path}: {exc}; recomputing", CacheWarning, stacklevel=2)
        return None


def write_table(path: Path, table: gd.GDTable) -> None:
    write_atomic(path, dumps(table_to_json_obj(table)))


def cached_table(cache_dir: Path | None, max_n: int, allow_large: bool = False) -> gd.GDTable:
    """Load, extend and persist the (R_n, T_n) table.  ``cache_dir=None``
    computes without touching the disk."""
    if cache_dir is None:
        return gd.build_table(max_n, allow_large)
    path = Path(cache_dir) / GD_FILE
    cached = read_table(path)
    if cached is not None and cached.max_n >= max_n:
        return gd.GDTable(max_n, cached.entries[: max_n + 1], cached.normalization)
    table = gd.build_table(max_n, allow_large, start=cached)
    write_table(path, table)
    return table


# -- pkl_table -------------------------------------------------------------------


def read_pkl(path: Path) -> dict[tuple[int, int], DiffPoly]:
    path = Path(path)
    if not path.exists():
        return {}
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
        if obj.get("schema") != SCHEMA_VERSION or obj.get("kind") != "pkl_table":
            raise ValueError("unsupported schema")
        out = {}
        for e in obj["entries"]:
            k, l = int(e["k"]), int(e["l"])
            p = DiffPoly.from_json_obj(e["P"])
            if dx(p) != gd.lenard_R(k) * dx(gd.lenard_R(l)) or p.constant_term():
                raise ValueError(f"P_{k},{l} fails dx P = R_k dx R_l")
            out[(k, l)] = p
        return out
    except Exception as exc:
        warnings.warn(f"ignoring cache {path}: {exc}; recomputing", CacheWarning, stacklevel=2)
        return {}


def cached_pkl(cache_dir: Path | None, k: int, l: int) -> gd.PklEntry:
    if cache_dir is None:
        return gd.compute_Pkl(k, l)
    path = Path(cache_dir) / PKL_FILE
    entries = read_pkl(path)
    if (k, l) in entries:
        return gd.PklEntry(k, l, entries[(k, l)])
    entry = gd.compute_Pkl(k, l)
    entries[(k, l)] = entry.P
    obj = {
        "schema": SCHEMA_VERSION,
        "kind": "pkl_table",
        "entries": [
            {"k": kk, "l": ll, "P": p.to_json_obj()} for (kk, ll), p in sorted(entries.items())
        ],
    }
    write_atomic(path, dumps(obj))
    return entry
