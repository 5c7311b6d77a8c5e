"""Canonical JSON serialization.

Identical inputs must produce byte-identical outputs, so everything is
emitted through one writer: object keys sorted, floats at 17 significant
digits (lossless round-trip), exact rationals as "p/q" strings.  Readers
accept numbers or "p/q" strings anywhere a scalar appears.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Any

from .chart import Coords
from .laminate import LaminateTree, SplitNode
from .matcore import Matrix, Scalar
from .measure import Atom, DiscreteMeasure


class JsonError(ValueError):
    pass


def format_scalar(x: Scalar):
    """JSON-ready form: int stays int, Fraction -> 'p/q', float -> float."""
    if isinstance(x, bool):
        raise JsonError("boolean is not a scalar")
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, float):
        return x
    raise JsonError(f"cannot serialize scalar {x!r}")


def read_scalar(v) -> Scalar:
    if isinstance(v, bool):
        raise JsonError("boolean is not a scalar")
    if isinstance(v, (int, float)):
        return v
    if isinstance(v, str):
        return Fraction(v)
    raise JsonError(f"cannot read scalar {v!r}")


def dumps(obj: Any) -> str:
    """Canonical writer; dict keys sorted, floats '%.17g'."""
    out: list[str] = []
    _emit(obj, out)
    return "".join(out)


def _emit(obj: Any, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if not math.isfinite(obj):
            raise JsonError(f"non-finite float {obj!r}")
        out.append(format(obj, ".17g"))
    elif isinstance(obj, Fraction):
        _emit(format_scalar(obj), out)
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for k, item in enumerate(obj):
            if k:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for k, key in enumerate(sorted(obj)):
            if k:
                out.append(",")
            if not isinstance(key, str):
                raise JsonError("object keys must be strings")
            _emit(key, out)
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise JsonError(f"cannot serialize {type(obj).__name__}")


# -- points ---------------------------------------------------------------

def point_to_json(point):
    if isinstance(point, Matrix):
        return [[format_scalar(x) for x in row] for row in point.rows]
    if isinstance(point, Coords):
        return [format_scalar(x) for x in point.entries()]
    raise JsonError(f"unknown point type {type(point).__name__}")


def point_from_json(data):
    """Nested arrays are a matrix (row-major); a flat 3-array is chart
    coordinates."""
    if not isinstance(data, list) or not data:
        raise JsonError("point must be a non-empty array")
    if isinstance(data[0], list):
        return Matrix([[read_scalar(x) for x in row] for row in data])
    if len(data) != 3:
        raise JsonError("coordinate points have exactly three entries")
    return Coords(*(read_scalar(x) for x in data))


# -- measures -------------------------------------------------------------

def measure_to_json(mu: DiscreteMeasure) -> dict:
    atoms = []
    for a in mu.atoms:
        key = "matrix" if isinstance(a.point, Matrix) else "coords"
        atoms.append({key: point_to_json(a.point),
                      "weight": format_scalar(a.weight)})
    return {"atoms": atoms}


def measure_from_json(data) -> DiscreteMeasure:
    if not isinstance(data, dict) or "atoms" not in data:
        raise JsonError("measure JSON needs an 'atoms' array")
    atoms = []
    for item in data["atoms"]:
        if "matrix" in item:
            point = point_from_json(item["matrix"])
        elif "coords" in item:
            point = Coords(*(read_scalar(x) for x in item["coords"]))
        else:
            raise JsonError("atom needs a 'matrix' or 'coords' entry")
        atoms.append(Atom(point, read_scalar(item["weight"])))
    return DiscreteMeasure(atoms)


# -- trees ----------------------------------------------------------------

def tree_to_json(tree: LaminateTree) -> dict:
    def go(node: SplitNode) -> dict:
        out = {"point": point_to_json(node.point),
               "weight": format_scalar(node.weight)}
        if node.children:
            out["children"] = [go(c) for c in node.children]
        return out
    return go(tree.root)


def tree_from_json(data) -> LaminateTree:
    def go(node) -> SplitNode:
        if not isinstance(node, dict) or "point" not in node or "weight" not in node:
            raise JsonError("tree node needs 'point' and 'weight'")
        children = tuple(go(c) for c in node.get("children", []))
        return SplitNode(point_from_json(node["point"]),
                         read_scalar(node["weight"]), children)
    return LaminateTree(go(data))


# -- reports and results ---------------------------------------------------

def validation_to_json(report) -> dict:
    return {
        "valid": report.valid,
        "tolerance": report.tol,
        "checks": [{
            "node": c.path,
            "weight_residual": float(c.weight_residual),
            "barycenter_residual": float(c.barycenter_residual),
            "rank_verdict": c.rank_verdict,
            "cone_ok": c.cone_ok,
            "degenerate": c.degenerate,
            "note": c.note,
        } for c in report.checks],
    }


def search_result_to_json(result) -> dict:
    return {
        "status": result.status,
        "defect": float(result.defect),
        "nodes": result.nodes,
        "directions": [point_to_json(d) for d in result.directions],
        "relative_weights": [float(w) for w in result.weights],
        "tree": tree_to_json(result.tree),
        "meta": {k: result.meta[k] for k in sorted(result.meta)
                 if isinstance(result.meta[k], (int, float, bool, str))},
    }


def certificate_to_json(cert) -> dict:
    return {
        "status": cert.status,
        "gap": float(cert.gap),
        "violation": float(cert.violation),
        "coefficients": [
            {"exponents": list(e), "value": format_scalar(c)}
            for e, c in sorted(cert.f.coeffs.items())
        ],
        "meta": {k: v for k, v in sorted(cert.meta.items())
                 if isinstance(v, (int, float, bool, str))},
    }


def certificate_from_json(data):
    from .separator import Certificate, PolyFunc

    coeffs = {tuple(item["exponents"]): read_scalar(item["value"])
              for item in data["coefficients"]}
    return Certificate(f=PolyFunc(coeffs), gap=read_scalar(data["gap"]),
                       violation=float(data["violation"]),
                       status=data["status"], meta=data.get("meta", {}))
