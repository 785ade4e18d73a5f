"""Command-line front end.

Subcommands: ``facets`` (certified neighbor enumeration, presets, OFF/JSON
export), ``bounds`` (table verification and per-group reports), ``planar``
(influence regions, overlap counts, randomized probes, SVG export) and
``screw`` (the 2k-neighbor verification).

Exit codes: 0 success, 1 usage or unknown-name errors, 2 degenerate input,
3 preset mismatch.  JSON output is deterministic for identical invocations
(sorted keys, no timing fields).
"""

from __future__ import annotations

import argparse
import functools
import importlib.resources
import json
import os
import sys

import numpy as np

from . import _expr, bounds
from .groups3d import CatalogError, make_group
from .planar import (
    BoundaryError,
    PlanarError,
    UnsupportedGroupError,
    influence_region,
    influence_to_json,
    influence_to_svg,
    make_planar_group,
    overlap_count,
    randomized_bound_probe,
    reduced_influence_region,
)
from .screw import HelixSpec, verify_screw_neighbors
from .stereohedron import (
    DegenerateBaseError,
    enumerate_neighbors,
    export_cell,
    report_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DEGENERATE = 2
EXIT_MISMATCH = 3


@functools.lru_cache(maxsize=1)
def load_presets() -> dict:
    text = (
        importlib.resources.files("stereohedra")
        .joinpath("data/presets.json")
        .read_text()
    )
    data = json.loads(text)
    return {p["id"]: p for p in data["presets"]}


def _preset_base(preset: dict) -> np.ndarray:
    return np.array([_expr.evaluate(e) for e in preset["base"]])


def _print_json(payload) -> None:
    if isinstance(payload, (dict, list)):
        print(json.dumps(payload, sort_keys=True, separators=(",", ":")))
    else:
        print(payload)


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("STEREO_THREADS", "1")))
    except ValueError:
        return 1


def cmd_facets(args) -> int:
    if args.preset:
        preset = load_presets().get(args.preset)
        if preset is None:
            print(f"unknown preset {args.preset!r}", file=sys.stderr)
            return EXIT_USAGE
        group = make_group(preset["group"], preset["params"])
        base = _preset_base(preset)
        expected = preset["expected_contacts"]
    else:
        if not (args.group and args.point):
            print("need --preset or --group/--point", file=sys.stderr)
            return EXIT_USAGE
        params = {}
        if args.params:
            for item in args.params.split(","):
                key, _, value = item.partition("=")
                params[key.strip()] = _expr.evaluate(value)
        if args.basis:
            vals = [float(v) for v in args.basis.split(",")]
            if len(vals) == 3:
                mat = np.diag(vals)
            elif len(vals) == 9:
                mat = np.array(vals).reshape(3, 3)
            else:
                print("--basis wants 3 or 9 numbers", file=sys.stderr)
                return EXIT_USAGE
            names = ["b1x", "b1y", "b1z", "b2x", "b2y", "b2z", "b3x", "b3y", "b3z"]
            params.update(dict(zip(names, mat.ravel())))
        try:
            group = make_group(args.group, params)
        except CatalogError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_USAGE
        base = np.array([_expr.evaluate(v) for v in args.point.split(",")])
        expected = None
    try:
        report = enumerate_neighbors(group, base)
    except DegenerateBaseError as exc:
        print(f"degenerate configuration: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    if args.off:
        with open(args.off, "wb") as fh:
            fh.write(export_cell(report, "OFF"))
    print(report_to_json(report))
    if expected is not None and report.contact_count != expected:
        print(
            f"preset {args.preset}: expected {expected} neighbors, "
            f"got {report.contact_count} ({report.facet_count} facets, "
            f"{len(report.tie_contacts)} zero-slack contacts)",
            file=sys.stderr,
        )
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_bounds(args) -> int:
    if args.action == "verify":
        report = bounds.table_verify()
        payload = {
            "rows": report.rows,
            "mismatches": list(report.mismatches),
            "global_max": report.global_max,
            "over_38": report.over_38,
            "over_50": report.over_50,
            "ok": report.ok,
        }
        _print_json(payload)
        if report.ok:
            print(f"{report.rows} rows OK", file=sys.stderr)
            return EXIT_OK
        return EXIT_USAGE
    if args.action == "show":
        try:
            rec = bounds.group_report(args.group)
        except bounds.UnknownGroupError:
            print(f"unknown group {args.group!r}", file=sys.stderr)
            return EXIT_USAGE
        _print_json(
            {
                "name": rec.name,
                "system": rec.system,
                "a": rec.a,
                "planar_type": rec.planar_type,
                "a0": rec.a0,
                "i": rec.i,
                "l": rec.l,
                "cor_bound": rec.cor_bound,
                "delone_bound": rec.delone_bound,
                "final_bound": rec.final_bound,
                "final_source": rec.final_source,
                "effective_bound": rec.effective_bound,
            }
        )
        return EXIT_OK
    print("bounds wants 'verify' or 'show'", file=sys.stderr)
    return EXIT_USAGE


def _planar_group_from_args(args):
    params = {}
    if args.params:
        for item in args.params.split(","):
            key, _, value = item.partition("=")
            params[key.strip()] = _expr.evaluate(value)
    return make_planar_group(args.type, **params)


def cmd_planar(args) -> int:
    try:
        group = _planar_group_from_args(args)
    except UnsupportedGroupError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.action == "influence":
            region = (
                reduced_influence_region(group)
                if args.reduced
                else influence_region(group)
            )
            payload = influence_to_json(region, group)
            if args.svg:
                with open(args.svg, "w") as fh:
                    fh.write(influence_to_svg(region, group))
            _print_json(payload)
            return EXIT_OK
        if args.action == "overlap":
            p = np.array([float(v) for v in args.p.split(",")])
            q = np.array([float(v) for v in args.q.split(",")])
            _print_json({"overlap": overlap_count(group, p, q)})
            return EXIT_OK
        if args.action == "probe":
            best = randomized_bound_probe(
                group, args.trials, args.seed, normalizer_related=args.normalizer
            )
            _print_json(
                {
                    "type": group.type,
                    "trials": args.trials,
                    "seed": args.seed,
                    "normalizer_related": bool(args.normalizer),
                    "max_overlap": best,
                }
            )
            return EXIT_OK
    except (UnsupportedGroupError, BoundaryError) as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE
    except PlanarError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_DEGENERATE
    print("planar wants influence, overlap or probe", file=sys.stderr)
    return EXIT_USAGE


def cmd_screw(args) -> int:
    if args.k < 2:
        print("screw order k must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    result = verify_screw_neighbors(HelixSpec(k=args.k, pitch=args.pitch, r=args.r))
    _print_json(
        {
            "k": args.k,
            "r": args.r,
            "pitch": args.pitch,
            "passed": result.passed,
            "neighbors": len(result.indices),
            "indices": list(result.indices),
        }
    )
    return EXIT_OK if result.passed else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stereohedra",
        description="Certified facet enumeration and bounds for crystallographic Voronoi cells",
    )
    parser.add_argument("--config", help="optional JSON file with default arguments")
    sub = parser.add_subparsers(dest="command")

    p_facets = sub.add_parser("facets", help="enumerate certified cell facets")
    p_facets.add_argument("--preset", help="reproduction preset id")
    p_facets.add_argument("--group", help="catalog group name")
    p_facets.add_argument("--params", help="comma list key=value of metric parameters")
    p_facets.add_argument("--basis", help="P1 basis: 3 diagonal or 9 matrix entries")
    p_facets.add_argument("--point", help="base point x,y,z (expressions allowed)")
    p_facets.add_argument("--off", help="write the cell mesh to this OFF file")
    p_facets.set_defaults(func=cmd_facets)

    p_bounds = sub.add_parser("bounds", help="bound table operations")
    p_bounds.add_argument("action", choices=["verify", "show"])
    p_bounds.add_argument("--group", help="group name for 'show'")
    p_bounds.set_defaults(func=cmd_bounds)

    p_planar = sub.add_parser("planar", help="planar group analyses")
    p_planar.add_argument("action", choices=["influence", "overlap", "probe"])
    p_planar.add_argument("--type", required=True, help="planar group type")
    p_planar.add_argument("--params", help="comma list key=value")
    p_planar.add_argument("--reduced", action="store_true")
    p_planar.add_argument("--svg", help="write the influence diagram to this file")
    p_planar.add_argument("--p", help="first base point x,y")
    p_planar.add_argument("--q", help="second base point x,y")
    p_planar.add_argument("--trials", type=int, default=1000)
    p_planar.add_argument("--seed", type=int)
    p_planar.add_argument("--normalizer", action="store_true")
    p_planar.set_defaults(func=cmd_planar)

    p_screw = sub.add_parser("screw", help="screw-orbit neighbor verification")
    p_screw.add_argument("action", choices=["verify"])
    p_screw.add_argument("--k", type=int, required=True)
    p_screw.add_argument("--r", type=float, default=1.0)
    p_screw.add_argument("--pitch", type=float, default=1.0)
    p_screw.set_defaults(func=cmd_screw)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            defaults = json.load(fh)
        for key, value in defaults.items():
            if getattr(args, key, None) in (None, False):
                setattr(args, key, value)
    if not getattr(args, "command", None):
        parser.print_help()
        return EXIT_USAGE
    if args.command == "planar" and args.action == "probe" and args.seed is None:
        print("planar probe requires --seed", file=sys.stderr)
        return EXIT_USAGE
    os.environ.setdefault("STEREO_THREADS", str(_thread_cap()))
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
