"""Readers and writers for spaces, loops, maps and scalar fields.

Space files
    ``.csv``: a distance matrix, optionally with a header row of labels.
    ``.json``: ``{"kind": "matrix", "dist": [[...]], "labels": [...]}``,
    ``{"kind": "graph", "vertex_count": n, "edges": [[u, v, w], ...]}``,
    ``{"kind": "planar", "coords": [[x, y], ...], "norm": "l2"}`` or
    ``{"kind": "generator", "spec": {...}}``.
    anything else: an edge list, one ``u v [w]`` per line, ``#`` comments.

Loop, map and field files are JSON; loops and maps carry a ``space_ref``
that is either a path (relative to the referring file) or an inline space
object.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import InvalidGraph, InvalidSpec, MetricTreesError
from .gallery import GeneratorSpec, generate
from .lipschitz import Grid, SampledLoop, SampledMap, ScalarField
from .space import FiniteMetricSpace, GraphSpec, NormedSampleSpace, metric_from_graph, validate_metric


class InputError(MetricTreesError, ValueError):
    """Unreadable or malformed input file."""


def _read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}", path=str(path)) from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: invalid JSON ({e.msg} at line {e.lineno})", path=str(path)) from None


def space_from_obj(obj: dict, base: Path | None = None) -> FiniteMetricSpace:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InputError("space object needs a 'kind'")
    kind = obj["kind"]
    if kind == "matrix":
        return validate_metric(np.asarray(obj["dist"], dtype=float), labels=obj.get("labels"))
    if kind == "graph":
        edges = [(int(e[0]), int(e[1]), float(e[2]) if len(e) > 2 else 1.0) for e in obj["edges"]]
        return metric_from_graph(GraphSpec(int(obj["vertex_count"]), edges))
    if kind == "planar":
        return NormedSampleSpace(np.asarray(obj["coords"], dtype=float), obj.get("norm", "l2"))
    if kind == "generator":
        return generate(GeneratorSpec.from_dict(obj["spec"]))
    if kind == "ref":
        return load_space(Path(base or ".") / obj["path"])
    raise InputError(f"unknown space kind {kind!r}")


def _read_csv_matrix(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError(f"{path}: empty matrix file")
    labels = None
    try:
        [float(c) for c in rows[0]]
    except ValueError:
        labels = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if len({len(r) for r in rows}) != 1:
        raise InputError(f"{path}: rows have different lengths",
                         lengths=sorted({len(r) for r in rows}))
    try:
        M = np.array([[float(c) for c in r] for r in rows])
    except ValueError as e:
        raise InputError(f"{path}: non-numeric entry ({e})") from None
    return validate_metric(M, labels=labels)


def _read_edge_list(path):
    edges = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.replace(",", " ").split()
            if len(parts) not in (2, 3):
                raise InputError(f"{path}:{lineno}: expected 'u v [w]'", line=lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise InputError(f"{path}:{lineno}: bad number", line=lineno) from None
            edges.append((u, v, w))
    if not edges:
        raise InvalidGraph(f"{path}: no edges")
    n = max(max(u, v) for u, v, _ in edges) + 1
    return metric_from_graph(GraphSpec(n, edges))


def load_space(path) -> FiniteMetricSpace:
    path = Path(path)
    if not path.exists():
        raise InputError(f"no such file: {path}", path=str(path))
    if path.suffix.lower() == ".csv":
        return _read_csv_matrix(path)
    if path.suffix.lower() == ".json":
        return space_from_obj(_read_json(path), path.parent)
    return _read_edge_list(path)


def space_to_obj(space: FiniteMetricSpace) -> dict:
    if isinstance(space, NormedSampleSpace):
        return {"kind": "planar", "coords": space.coords.tolist(), "norm": space.norm}
    obj = {"kind": "matrix", "dist": space.dist.tolist()}
    if space.labels is not None:
        obj["labels"] = list(space.labels)
    return obj


def resolve_space_ref(ref, base: Path) -> FiniteMetricSpace:
    if isinstance(ref, str):
        return load_space(base / ref)
    if isinstance(ref, dict):
        return space_from_obj(ref, base)
    raise InputError("space_ref must be a path or an inline space object")


def load_loop(path) -> tuple[SampledLoop, object]:
    obj = _read_json(path)
    if "points" not in obj:
        raise InputError(f"{path}: loop file needs 'points'")
    return SampledLoop(tuple(obj["points"]), obj.get("times")), obj.get("space_ref")


def loop_to_obj(loop: SampledLoop, space_ref=None) -> dict:
    return {"space_ref": space_ref, "times": loop.times.tolist(), "points": list(loop.points)}


def load_field(path) -> ScalarField:
    obj = _read_json(path)
    if "values" not in obj or "lip" not in obj:
        raise InputError(f"{path}: field file needs 'values' and 'lip'")
    return ScalarField(obj["values"], obj["lip"])


def field_to_obj(f: ScalarField) -> dict:
    return {"values": f.values.tolist(), "lip": f.lip}


def load_map(path) -> SampledMap:
    path = Path(path)
    obj = _read_json(path)
    try:
        g = obj["grid"]
        grid = Grid(tuple(g["shape"]), float(g["spacing"]), np.asarray(g["mask"], dtype=bool))
        space = resolve_space_ref(obj["space_ref"], path.parent)
        return SampledMap(space, grid, np.asarray(obj["values"], dtype=np.int64))
    except KeyError as e:
        raise InputError(f"{path}: map file is missing {e}") from None


def map_to_obj(smap: SampledMap, space_ref=None) -> dict:
    if space_ref is None:
        space_ref = space_to_obj(smap.space)
    return {"space_ref": space_ref, "grid": smap.grid.to_dict(), "values": smap.values.tolist()}


def parse_spec_arg(text: str) -> GeneratorSpec:
    """Generator spec from inline JSON or from a JSON file path."""
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidSpec(f"spec is not valid JSON: {e.msg}") from None
    else:
        obj = _read_json(text)
    return GeneratorSpec.from_dict(obj)


def jsonable(x):
    """Plain JSON values; non-finite floats become the strings ``inf``, ``-inf``, ``nan``."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (frozenset, set)):
        return [jsonable(v) for v in sorted(x)]
    if isinstance(x, np.ndarray):
        return jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if x is None or isinstance(x, str):
        return x
    if hasattr(x, "to_dict"):
        return jsonable(x.to_dict())
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"
