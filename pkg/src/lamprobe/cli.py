"""Command line interface.

Commands: verify, search, sweep, separate, tree-validate, tree-flatten,
measure-distance.  Rational syntax "p/q" is accepted anywhere a tau or
weight appears; all emitted JSON is canonical (sorted keys, 17 significant
digits), so identical inputs produce byte-identical outputs.

Exit codes: verify and tree-validate return 0 on a full pass, 1 on any
failing check, 2 on unknown scenarios or internal errors.  The remaining
commands return 0 when the run completed (whatever the mathematical
verdict), 1 on invalid input, 2 on internal errors.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

from . import jsonio, scenarios
from .chart import Chart, ChartError, Cone, Coords, parse_chart, parse_cone
from .laminate import TreeError, flatten, validate
from .matcore import parse_scalar
from .measure import MeasureError, distance
from .scenarios import ScenarioError
from .search import (SearchConfig, SearchError, proper_directions, search,
                     sweep)
from .separator import SeparatorConfig, SeparatorError, separate

USAGE_ERROR = 1
INTERNAL_ERROR = 2

#: the three limit normal classes used by --restricted sweeps
LIMIT_NORMALS = ((1.0, 0.0), (0.0, 1.0), (math.sqrt(0.5), math.sqrt(0.5)))


class CliError(Exception):
    """Invalid input; maps to exit code 1."""


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ScenarioError, ChartError, MeasureError, TreeError, SearchError,
            SeparatorError, jsonio.JsonError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return INTERNAL_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lamprobe",
        description="verification and search toolkit for matrix-measure laminates")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("verify", help="self-verify a named scenario")
    p.add_argument("scenario")
    p.add_argument("--tau", type=parse_scalar)
    p.add_argument("--cone", help="cone spec: tau:T | lambda0 | axes | dict:@file")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("search", help="bounded lamination search for a target")
    _target_args(p)
    p.add_argument("--cone", required=True)
    p.add_argument("--depth", type=int, default=8)
    p.add_argument("--dict-size", type=int, default=65)
    p.add_argument("--w-min", type=float, default=0.01)
    p.add_argument("--w-max", type=float, default=0.99)
    p.add_argument("--max-nodes", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restricted", action="store_true",
                   help="only directions whose lamination normals lie near "
                        "(1,0), (0,1), (1,1)")
    p.add_argument("--max-angle", type=float, default=0.2)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("sweep", help="run the search across a tau family")
    p.add_argument("--scenario", required=True)
    p.add_argument("--taus", required=True,
                   help="comma-separated descending positive values")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--dict-size", type=int, default=65)
    p.add_argument("--w-min", type=float, default=0.05)
    p.add_argument("--w-max", type=float, default=0.95)
    p.add_argument("--max-nodes", type=int, default=5000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restricted", action="store_true")
    p.add_argument("--max-angle", type=float, default=0.2)
    p.add_argument("--out", type=Path)
    p.add_argument("--directions-out", type=Path,
                   help="write the proper-direction analysis as JSON")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("separate", help="search for a cone-convex separator")
    _target_args(p)
    p.add_argument("--cone", required=True)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--dense", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("tree-validate", help="validate a laminate tree file")
    p.add_argument("--tree", required=True)
    p.add_argument("--tau", type=parse_scalar)
    p.add_argument("--cone")
    p.add_argument("--chart")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_tree_validate)

    p = sub.add_parser("tree-flatten", help="flatten a tree to its leaf measure")
    p.add_argument("--tree", required=True)
    p.add_argument("--tau", type=parse_scalar)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_tree_flatten)

    p = sub.add_parser("measure-distance",
                       help="transport distance between two measure files")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_measure_distance)
    return parser


def _target_args(p) -> None:
    p.add_argument("--target", required=True,
                   help="scenario name or a measure JSON file")
    p.add_argument("--tau", type=parse_scalar)
    p.add_argument("--chart", help="chart spec: tau:T | 3x2")


def _emit(args, payload: dict, summary: str) -> None:
    text = jsonio.dumps(payload) + "\n"
    if args.out:
        args.out.write_text(text)
        print(f"{summary} -> {args.out}")
    else:
        sys.stdout.write(text)


def _load_json(path: str):
    p = Path(path[1:] if path.startswith("@") else path)
    if not p.is_file():
        raise CliError(f"no such file: {p}")
    try:
        return json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"bad JSON in {p}: {exc}")


def _load_directions(path: str):
    data = _load_json("@" + path)
    return [Coords(*(jsonio.read_scalar(x) for x in row)) for row in data]


def _parse_cone_arg(spec: str) -> Cone:
    return parse_cone(spec, load_directions=_load_directions)


def _resolve_target(args):
    """Returns (coords measure, chart)."""
    name = args.target
    if name in scenarios.MEASURE_SCENARIOS or name in scenarios.TREE_SCENARIOS:
        mu = scenarios.scenario_coords_measure(name, args.tau)
        chart = Chart("3x2") if name == "three-by-two" else \
            Chart("tau", args.tau if args.tau is not None else 0)
    else:
        mu = jsonio.measure_from_json(_load_json(name))
        chart = None
    if args.chart:
        chart = parse_chart(args.chart)
    if chart is None:
        chart = _chart_from_cone(args.cone)
    if not isinstance(mu.atoms[0].point, Coords):
        mu = mu.map_points(lambda m: chart.matrix_to_coords(m))
    return mu, chart


def _chart_from_cone(cone_spec: str) -> Chart:
    cone = _parse_cone_arg(cone_spec)
    if cone.kind == "quadric":
        return Chart("tau", cone.tau)
    if cone.kind == "axes":
        return Chart("3x2")
    raise CliError("cannot infer a chart; pass --chart")


def _search_config(args) -> SearchConfig:
    restricted = getattr(args, "restricted", False)
    return SearchConfig(
        max_depth=args.depth, w_min=args.w_min, w_max=args.w_max,
        tol=args.tol, seed=args.seed, max_nodes=args.max_nodes,
        dict_size=args.dict_size,
        normal_targets=LIMIT_NORMALS if restricted else None,
        normal_max_angle=args.max_angle)


# -- commands ---------------------------------------------------------------


def cmd_verify(args) -> int:
    name = args.scenario
    known = set(scenarios.MEASURE_SCENARIOS + scenarios.TREE_SCENARIOS) - {"nu0"}
    if name not in known:
        print(f"error: unknown scenario {name!r}", file=sys.stderr)
        return INTERNAL_ERROR
    cone = _parse_cone_arg(args.cone) if args.cone else None
    if name in scenarios.TREE_SCENARIOS:
        report = _verify_tree_scenario(name, args.tau, cone, args.tol)
    else:
        bundle = scenarios.scenario_bundle(name, args.tau)
        if cone is not None:
            bundle.cone = cone
        report = bundle.verify(tol=args.tol)
    for c in report.checks:
        mark = "ok " if c.passed else "FAIL"
        line = f"[{mark}] {c.name}"
        if c.detail:
            line += f" ({c.detail})"
        print(line)
    payload = {"scenario": name, "passed": report.ok,
               "checks": [{"name": c.name, "passed": c.passed,
                           "detail": c.detail} for c in report.checks]}
    if args.out:
        args.out.write_text(jsonio.dumps(payload) + "\n")
    print("PASS" if report.ok else "FAIL")
    return 0 if report.ok else 1


def _verify_tree_scenario(name, tau, cone, tol):
    report = scenarios.CheckReport()
    tree = scenarios.scenario_tree(name, tau)
    if cone is None:
        cone = Cone.lambda0() if name == "nu0-tree" else Cone.quadric(tau)
    vr = validate(tree, cone=cone, tol=tol)
    report.add("tree validates under cone", vr.valid,
               f"{len(vr.failures())} failing nodes")
    leaves = flatten(tree)
    if name == "nu0-tree":
        d = distance(leaves, scenarios.nu0_measure())
        report.add("flattens to the limit measure", d == 0,
                   f"transport distance {float(d):.3g}")
    else:
        a1, a2 = scenarios.mu_weights(Fraction(tau))
        report.add("root weights sum to one", a1 + a2 == 1, f"{a1}+{a2}")
        chart = Chart("tau", tau)
        d = distance(scenarios.embed_measure(leaves, chart),
                     scenarios.embed_measure(scenarios.nu0_measure(), chart))
        report.add("stays within 2*tau of the limit measure",
                   float(d) <= 2 * float(tau), f"transport distance {float(d):.3g}")
    return report


def cmd_search(args) -> int:
    target, chart = _resolve_target(args)
    cone = _parse_cone_arg(args.cone)
    result = search(target, chart, cone, _search_config(args))
    payload = jsonio.search_result_to_json(result)
    _emit(args, payload,
          f"search: {result.status}, defect {result.defect:.6g}")
    return 0


def cmd_sweep(args) -> int:
    name = args.scenario
    taus = [parse_scalar(t) for t in args.taus.split(",") if t.strip()]
    if not taus:
        raise CliError("empty tau list")
    rows = sweep(lambda t: scenarios.scenario_coords_measure(name, t),
                 taus,
                 lambda t: Chart("tau", t),
                 lambda t: Cone.quadric(t),
                 _search_config(args))
    lines = ["tau,defect,status,nodes,directions,weights"]
    for row in rows:
        if row.result is None:
            lines.append(f"{format(row.tau, '.17g')},,error: {row.error},0,,")
            continue
        r = row.result
        dirs = ";".join(":".join(format(float(v), ".17g") for v in d.entries())
                        for d in r.directions)
        ws = ";".join(format(w, ".17g") for w in r.weights)
        lines.append(f"{format(row.tau, '.17g')},{format(r.defect, '.17g')},"
                     f"{r.status},{r.nodes},{dirs},{ws}")
    text = "\n".join(lines) + "\n"
    if args.out:
        args.out.write_text(text)
        print(f"sweep: {len(rows)} rows -> {args.out}")
    else:
        sys.stdout.write(text)
    if args.directions_out:
        limits = proper_directions(rows, w_min=args.w_min, w_max=args.w_max,
                                   angle_tol=args.max_angle)
        payload = {"proper_directions": [
            {"normal": [n[0], n[1]], "relative_weight": w} for n, w in limits]}
        args.directions_out.write_text(jsonio.dumps(payload) + "\n")
        print(f"proper directions -> {args.directions_out}")
    return 0


def cmd_separate(args) -> int:
    target, _ = _resolve_target(args)
    cone = _parse_cone_arg(args.cone)
    cfg = SeparatorConfig(dense_lines=args.dense, seed=args.seed)
    cert = separate(target, cone, degree=args.degree, cfg=cfg)
    _emit(args, jsonio.certificate_to_json(cert),
          f"separate: {cert.status}, gap {float(cert.gap):.6g}")
    return 0


def cmd_tree_validate(args) -> int:
    tree = jsonio.tree_from_json(_load_json(args.tree))
    cone = _parse_cone_arg(args.cone) if args.cone else None
    chart = parse_chart(args.chart) if args.chart else None
    report = validate(tree, cone=cone, chart=chart, tol=args.tol)
    payload = jsonio.validation_to_json(report)
    _emit(args, payload, f"tree-validate: {'valid' if report.valid else 'invalid'}")
    return 0 if report.valid else 1


def cmd_tree_flatten(args) -> int:
    tree = jsonio.tree_from_json(_load_json(args.tree))
    mu = flatten(tree)
    _emit(args, jsonio.measure_to_json(mu), f"tree-flatten: {len(mu)} atoms")
    return 0


def cmd_measure_distance(args) -> int:
    mu1 = jsonio.measure_from_json(_load_json(args.first))
    mu2 = jsonio.measure_from_json(_load_json(args.second))
    d = distance(mu1, mu2)
    value = jsonio.format_scalar(d)
    print(value if isinstance(value, str) else format(float(d), ".17g"))
    return 0


if __name__ == "__main__":
    sys.exit(main())
