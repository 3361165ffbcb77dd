"""JSON formats for spaces, elements, functions and decompositions.

Floats are written with ``repr`` (shortest round-trip form), so a matrix
read back from disk is bit-identical to the one written.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import StructureError
from .free_space import FreeElement, MolecularDecomposition, Molecule
from .lip_func import LipFunction
from .metric_core import FiniteMetricSpace, MetricGraph, Point, build_ladder


class ParseError(Exception):
    """Malformed input file; message carries the location."""


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def dumps(obj):
    return json.dumps(obj, indent=1, default=_default, allow_nan=False) + "\n"


def read_json(path):
    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from None


def space_to_json(space):
    pts = []
    for p in space.points:
        entry = {"id": p.id, "label": p.label}
        if p.coords is not None:
            entry["coords"] = list(p.coords)
        pts.append(entry)
    out = {"points": pts, "base": space.base, "dist": space.dist.tolist()}
    if space.kind != "generic":
        out["kind"] = space.kind
    if space.meta:
        out["meta"] = space.meta
    return out


def space_from_json(obj, where="<space>"):
    """Returns ``(space, graph_or_None)``."""
    try:
        if "dist" in obj:
            pts = obj.get("points")
            D = np.array(obj["dist"], dtype=float)
            if pts is None:
                pts = [{"id": i} for i in range(len(D))]
            points = []
            for i, p in enumerate(sorted(pts, key=lambda q: q["id"])):
                if p["id"] != i:
                    raise ParseError(f"{where}: point ids must be 0..n-1, found {p['id']}")
                c = p.get("coords")
                points.append(Point(i, p.get("label"), tuple(map(float, c)) if c is not None else None))
            return FiniteMetricSpace(points, D, base=int(obj.get("base", 0)),
                                     kind=obj.get("kind", "generic"), meta=obj.get("meta")), None
        if "graph" in obj:
            g = obj["graph"]
            verts = g.get("vertices")
            if verts is None:
                pts = obj.get("points", [])
                verts = [p.get("label") for p in sorted(pts, key=lambda q: q["id"])] or None
            if verts is None:
                n = 1 + max(max(int(u), int(v)) for u, v, _ in g["edges"])
                verts = n
            graph = MetricGraph(verts, g["edges"], base=int(obj.get("base", 0)))
            return graph.space, graph
        if "ladder" in obj:
            p = obj["ladder"]
            return build_ladder(int(p["n_levels"]), int(p["rung_resolution"]),
                                int(p["side_resolution"]), p.get("extra_heights", ()),
                                p.get("extra_rungs", ())), None
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{where}: {type(e).__name__}: {e}") from None
    raise ParseError(f"{where}: expected one of 'dist', 'graph', 'ladder'")


def load_space(path):
    return space_from_json(read_json(path), str(path))


def element_to_json(el):
    return {"coeffs": {str(p): c for p, c in sorted(el.coeffs.items())}}


def element_from_json(space, obj, where="<element>"):
    try:
        if "terms" in obj:
            return decomposition_from_json(space, obj, where).as_element()
        return FreeElement(space, {int(k): float(v) for k, v in obj["coeffs"].items()})
    except (KeyError, TypeError, ValueError, StructureError) as e:
        raise ParseError(f"{where}: {e}") from None


def function_to_json(f):
    return {"values": {str(i): float(v) for i, v in enumerate(f.values)}}


def function_from_json(space, obj, where="<function>"):
    try:
        vals = np.zeros(len(space))
        for k, v in obj["values"].items():
            vals[int(k)] = float(v)
        return LipFunction(space, vals)
    except (KeyError, TypeError, ValueError, IndexError, StructureError) as e:
        raise ParseError(f"{where}: {e}") from None


def decomposition_to_json(dec):
    return {"terms": [[w, m.u, m.v] for w, m in dec.terms]}


def decomposition_from_json(space, obj, where="<decomposition>"):
    try:
        return MolecularDecomposition(space, [(float(w), Molecule(int(u), int(v)))
                                              for w, u, v in obj["terms"]])
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"{where}: {e}") from None
