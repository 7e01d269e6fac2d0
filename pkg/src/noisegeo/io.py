"""Reproducible text artifacts: CSV tables with a ``#`` metadata header, and JSON.

Floats are written with 17 significant digits so a file round-trips to the
same doubles and identical runs produce byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .pauli import pauli_labels

FLOAT_FMT = "%.17g"


def config_hash(config: Mapping) -> str:
    """SHA-256 of the canonical JSON form of ``config``."""
    text = json.dumps(config, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(text.encode()).hexdigest()


def _fmt(x) -> str:
    if isinstance(x, (str, np.str_)):
        return str(x)
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return FLOAT_FMT % float(x)


def write_csv(path, columns: Sequence[str], rows, meta: Mapping | None = None) -> Path:
    """Comma-separated table preceded by ``# key: value`` lines."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}: {v}" for k, v in (meta or {}).items()]
    lines.append(",".join(columns))
    for row in rows:
        row = list(row)
        if len(row) != len(columns):
            raise ValueError(f"row has {len(row)} entries, header has {len(columns)}")
        lines.append(",".join(_fmt(x) for x in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def read_csv(path) -> tuple[dict, list[str], np.ndarray]:
    """Inverse of :func:`write_csv` for all-numeric tables: ``(meta, columns, data)``."""
    meta, body = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
        elif line.strip():
            body.append(line)
    columns = body[0].split(",")
    data = np.array([[float(x) for x in ln.split(",")] for ln in body[1:]]).reshape(-1, len(columns))
    return meta, columns, data


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, Path):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _round_floats(o):
    # repr of a double is already shortest-round-trip; keep it but normalise -0.0
    if isinstance(o, float):
        return 0.0 if o == 0 else o
    if isinstance(o, dict):
        return {k: _round_floats(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_round_floats(v) for v in o]
    return o


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(_round_floats(json.loads(json.dumps(obj, default=_json_default))), indent=2, sort_keys=True)
    path.write_text(text + "\n")
    return path


# ---------------------------------------------------------------------------
# domain exports

def export_error_curve(path, curve, meta=None, tol: float = 1e-14) -> Path:
    """Columns ``t`` then one per axis the curve visits (``max |r'_j| > tol``)."""
    keep = np.flatnonzero(np.max(np.abs(curve.rprime), axis=0) > tol)
    cols = ["t"] + [curve.axes[j] for j in keep]
    rows = np.column_stack([curve.times, curve.rprime[:, keep]])
    return write_csv(path, cols, rows, meta)


def export_trajectory(path, trajectory, top_k: int = 3, meta=None) -> Path:
    """Columns depth, cumulative distance, cumulative components on the top-k axes."""
    cum = trajectory.cumulative
    order = np.argsort(-np.max(np.abs(cum), axis=0), kind="stable")[:top_k]
    cols = ["depth", "distance"] + [trajectory.axes[j] for j in order]
    depth = np.arange(1, trajectory.depth + 1)
    rows = [[int(d), dist, *c] for d, dist, c in zip(depth, trajectory.distances, cum[:, order])]
    return write_csv(path, cols, rows, meta)


def export_ptm(stem, ptm: np.ndarray, meta=None, diagnostics: Mapping | None = None) -> tuple[Path, Path]:
    """``<stem>.csv`` (row label + one column per Pauli) and ``<stem>.json``."""
    ptm = np.asarray(ptm, dtype=float)
    n = int(round(np.log(len(ptm)) / np.log(4)))
    labels = list(pauli_labels(n))
    stem = Path(stem)
    csv_path = write_csv(stem.with_suffix(".csv"), ["row"] + labels,
                         [[lab, *row] for lab, row in zip(labels, ptm)], meta)
    doc = {"labels": labels, "ptm": ptm, "meta": dict(meta or {})}
    if diagnostics is not None:
        doc["diagnostics"] = dict(diagnostics)
    return csv_path, write_json(stem.with_suffix(".json"), doc)


def export_filter_function(path, omega: np.ndarray, ff: np.ndarray, axes: Sequence[str], meta=None,
                           tol: float = 1e-14) -> Path:
    """Columns ``omega`` then ``Re_<axis>, Im_<axis>`` for axes with a nonzero filter."""
    keep = np.flatnonzero(np.max(np.abs(ff), axis=0) > tol)
    cols = ["omega"]
    for j in keep:
        cols += [f"Re_{axes[j]}", f"Im_{axes[j]}"]
    parts = [omega]
    for j in keep:
        parts += [ff[:, j].real, ff[:, j].imag]
    return write_csv(path, cols, np.column_stack(parts), meta)


def export_twirls(path, assignments: Sequence) -> Path:
    """One JSON document per line, in run order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(a.to_json() + "\n" for a in assignments))
    return path
