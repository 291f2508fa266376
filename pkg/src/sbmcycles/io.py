"""Text formats: edge lists, label files, flat key=value files, JSON lines."""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .graph_model import Graph, ModelParams, check_labels


def write_edgelist(G: Graph, path, comments: dict | None = None) -> None:
    """Header ``n=<n>``, optional ``# key=value`` comment lines, then ``i j`` per edge."""
    i, j = G.edges()
    lines = [f"n={G.n}"]
    for key, value in (comments or {}).items():
        lines.append(f"# {key}={value}")
    lines.extend(f"{a} {b}" for a, b in zip(i.tolist(), j.tolist()))
    Path(path).write_text("\n".join(lines) + "\n")


def read_edgelist(path) -> Graph:
    n = None
    edges = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            if not line.startswith("n="):
                raise ValueError(f"{path}:{lineno}: expected header 'n=<n>'")
            n = int(line[2:])
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"{path}:{lineno}: expected 'i j', got {raw!r}")
        edges.append((int(parts[0]), int(parts[1])))
    if n is None:
        raise ValueError(f"{path}: missing 'n=<n>' header")
    return Graph.from_edges(n, edges)


def read_comments(path) -> dict:
    """``# key=value`` lines of an edge-list or label file."""
    out = {}
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if line.startswith("#") and "=" in line:
            key, value = line[1:].strip().split("=", 1)
            out[key.strip()] = value.strip()
    return out


def write_labels(sigma, path, comments: dict | None = None) -> None:
    sigma = check_labels(sigma)
    lines = [f"# {k}={v}" for k, v in (comments or {}).items()]
    lines.extend("+1" if s > 0 else "-1" for s in sigma.tolist())
    Path(path).write_text("\n".join(lines) + "\n")


def read_labels(path) -> np.ndarray:
    vals = [int(line) for line in Path(path).read_text().split("\n")
            if line.strip() and not line.strip().startswith("#")]
    return check_labels(vals)


def parse_keyvalue(text: str) -> dict[str, str]:
    """Flat ``key=value`` lines; ``#`` starts a comment, blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ValueError(f"line {lineno}: empty key")
        out[key] = value.strip()
    return out


def format_keyvalue(data: dict) -> str:
    return "".join(f"{k}={_fmt(v)}\n" for k, v in data.items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ",".join(_fmt(x) for x in v)
    return str(v)


def params_to_text(params: ModelParams) -> str:
    return format_keyvalue({"n": params.n, "p": params.p, "q": params.q})


def params_from_text(text: str) -> ModelParams:
    kv = parse_keyvalue(text)
    missing = {"n", "p", "q"} - kv.keys()
    if missing:
        raise ValueError(f"params file is missing {sorted(missing)}")
    return ModelParams(int(kv["n"]), float(kv["p"]), float(kv["q"]))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return None if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(record: dict) -> str:
    """Canonical one-line JSON: sorted keys, shortest round-trip floats."""
    return json.dumps(_jsonable(record), sort_keys=True, separators=(",", ":"))


def write_jsonl(records, path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")


def write_csv(rows: list[dict], path, header_comment: str | None = None) -> None:
    """Plain CSV with the union of keys as columns; nested values are JSON-encoded."""
    cols = []
    for row in rows:
        for k in row:
            if k not in cols:
                cols.append(k)
    with open(path, "w") as fh:
        if header_comment:
            fh.write(f"# {header_comment}\n")
        fh.write(",".join(cols) + "\n")
        for row in rows:
            cells = []
            for c in cols:
                v = row.get(c, "")
                if isinstance(v, (dict, list)):
                    v = '"' + dumps(v).replace('"', '""') + '"'
                elif isinstance(v, float):
                    v = repr(v)
                cells.append(str(v))
            fh.write(",".join(cells) + "\n")
