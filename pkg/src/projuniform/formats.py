"""Point-set CSV files, partition JSON and report envelopes."""
from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path

import numpy as np

from . import __version__
from .errors import PointFileError, ProjUniformError
from .samplers import Partition, _jsonable
from .spaces import PointSet, SpaceParams, make_space

_HEADER = re.compile(r"^#\s*space=([A-Za-z])\s+d=(\d+)\s*$")


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def points_to_csv(X: PointSet) -> str:
    buf = io.StringIO()
    buf.write(f"# space={X.params.field.value} d={X.params.d}\n")
    for row in X.coords.reshape(X.N, -1):
        buf.write(",".join(format_float(v) for v in row) + "\n")
    return buf.getvalue()


def write_points(X: PointSet, path) -> None:
    Path(path).write_text(points_to_csv(X))


def parse_points(text: str, provenance: str = "file") -> PointSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise PointFileError("empty point file")
    m = _HEADER.match(lines[0].strip())
    if not m:
        raise PointFileError("first line must be '# space=<R|C|H> d=<int>'")
    try:
        params = make_space(m.group(1).upper(), int(m.group(2)))
    except ProjUniformError as exc:
        raise PointFileError(str(exc)) from exc
    if not params.has_points:
        raise PointFileError(f"point files are not supported for {params.name}")
    width = params.d * params.k
    rows = []
    for lineno, row in enumerate(csv.reader(lines[1:]), start=2):
        if row and row[0].lstrip().startswith("#"):
            continue
        if len(row) != width:
            raise PointFileError(f"line {lineno}: expected {width} values, got {len(row)}")
        try:
            rows.append([float(v) for v in row])
        except ValueError as exc:
            raise PointFileError(f"line {lineno}: {exc}") from exc
    if not rows:
        raise PointFileError("point file has no points")
    arr = np.array(rows)
    if not np.all(np.isfinite(arr)):
        raise PointFileError("non-finite coordinate")
    norms = np.linalg.norm(arr, axis=1)
    if np.any(norms < 1e-300):
        raise PointFileError("zero vector in point file")
    # rescale only rows that are not already unit, so round trips stay bit-exact
    off = np.abs(norms - 1.0) > 1e-12
    arr[off] /= norms[off, None]
    return PointSet(params, arr.reshape(-1, params.d, params.k), provenance)


def read_points(path) -> PointSet:
    return parse_points(Path(path).read_text())


def write_partition(part: Partition, path) -> None:
    Path(path).write_text(json.dumps(part.to_dict()))


def read_partition(path, params: SpaceParams | None = None) -> Partition:
    data = json.loads(Path(path).read_text())
    if params is None:
        from .spaces import parse_space
        params = parse_space(data["space"])
    return Partition.from_dict(data, params)


def envelope(config: dict, result, seed=None) -> dict:
    """Wrap a result with the tool version, the full run configuration and the seed."""
    return {"tool": "projuniform", "version": __version__, "config": _jsonable(config),
            "seed": seed, "result": _jsonable(result)}


def dumps(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=False, default=_default)


def _default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def rows_to_csv(rows: list[dict], columns: list[str] | None = None, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    if not rows:
        return buf.getvalue()
    columns = columns or list(rows[0])
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_float(v) if isinstance(v, (float, np.floating)) else v
                    for v in (r[c] for c in columns)])
    return buf.getvalue()
