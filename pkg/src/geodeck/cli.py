"""Command-line entry point: ``geodeck <command> [options]``.

Exit status is 0 on success, 1 when a property check reports failures and
2 on unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import harness
from .development import (BoundaryHit, GeodesicPath, Segment, SurfacePoint, TangentDirection,
                          VertexHit, is_simple, trace_geodesic, vertex_point)
from .isosceles import (LatticeGeodesicIndex, build_isosceles, check_realization,
                        enumerate_closed_geodesics, realize_lattice_geodesic,
                        reconstruct_from_flat_surface)
from .regions import CutError, disc_curvature, split_along_paths
from .shortest_path import DepthExceeded, distance_search
from .surface import SurfaceError, curvature_report, double_polygon, load_off


class InputError(Exception):
    pass


# serialization ------------------------------------------------------------

def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent=0):
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, float):
        if not math.isfinite(obj):
            return "null"
        text = format(obj + 0.0, ".17g")
        return text if any(ch in text for ch in ".en") else text + ".0"
    return json.dumps(obj)


def dumps(obj):
    """JSON with keys in insertion order and floats at 17 significant digits."""
    return _encode(_plain(obj)) + "\n"


def _emit(args, text):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


# argument helpers ---------------------------------------------------------

def _floats(text, n=None, name="value"):
    try:
        vals = [float(t) for t in text.replace(";", ",").split(",") if t.strip()]
    except ValueError:
        raise InputError(f"could not parse {name}: {text!r}")
    if n is not None and len(vals) != n:
        raise InputError(f"{name} needs {n} numbers, got {len(vals)}")
    return vals


def _read_surface(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}")
    return load_off(text)


def _point(surface, text):
    """``v:INDEX`` or ``FACE:b0,b1,b2``."""
    head, _, tail = text.partition(":")
    if head == "v":
        v = int(tail)
        if not 0 <= v < surface.n_vertices:
            raise InputError(f"vertex {v} out of range")
        return vertex_point(surface, v)
    try:
        f = int(head)
    except ValueError:
        raise InputError(f"bad point {text!r}; use v:INDEX or FACE:b0,b1,b2")
    if not 0 <= f < surface.n_faces:
        raise InputError(f"face {f} out of range")
    try:
        return SurfacePoint(f, tuple(_floats(tail, 3, "barycentric coordinates")))
    except ValueError as exc:
        raise InputError(str(exc))


def _path_from_dict(d):
    segs = [Segment(int(s["face"]), tuple(s["entry"]), tuple(s["exit"])) for s in d["segments"]]
    return GeodesicPath(segs, float(d["total_length"]), bool(d.get("closed", False)))


def _sides(args):
    if not args.sides:
        raise InputError("--sides a,b,c is required")
    return _floats(args.sides, 3, "--sides")


def _positive(value, name):
    if value is not None and not value > 0:
        raise InputError(f"{name} must be positive")


# commands -----------------------------------------------------------------

def cmd_curvature(args):
    surface = _read_surface(args.mesh)
    rep = curvature_report(surface)
    d = rep.to_dict()
    d["expected_total"] = 4 * math.pi
    _emit(args, dumps(d))
    return 0


def cmd_trace(args):
    surface = _read_surface(args.mesh)
    start = _point(surface, args.start)
    dx, dy = _floats(args.direction, 2, "--direction")
    try:
        path = trace_geodesic(surface, start, TangentDirection(start.face, (dx, dy)), args.length)
    except (VertexHit, BoundaryHit) as exc:
        raise InputError(str(exc))
    out = path.to_dict()
    out["simple"] = bool(path.closed and is_simple(surface, path))
    _emit(args, dumps(out))
    return 0


def cmd_distance(args):
    surface = _read_surface(args.mesh)
    a, b = _point(surface, args.source), _point(surface, args.target)
    try:
        res = distance_search(surface, a, b, depth=args.depth)
    except DepthExceeded as exc:
        raise InputError(str(exc))
    _emit(args, dumps({"length": res.length, "path": res.path.to_dict(),
                       "expanded": res.expanded}))
    return 0


def cmd_cut(args):
    surface = _read_surface(args.mesh)
    try:
        path = _path_from_dict(json.loads(Path(args.path).read_text()))
    except (OSError, KeyError, ValueError) as exc:
        raise InputError(f"cannot read path {args.path}: {exc}")
    try:
        res = split_along_paths(surface, [path])
    except CutError as exc:
        raise InputError(str(exc))
    discs = res.components
    if args.format == "off":
        if not args.out:
            raise InputError("--format off needs --out PREFIX")
        for i, disc in enumerate(discs):
            Path(f"{args.out}_disc{i}.off").write_text(disc.to_off())
            Path(f"{args.out}_disc{i}.json").write_text(dumps(disc.sidecar()))
        return 0
    summary = [{"area": d.area, "curvature": disc_curvature(d),
                "boundary_length": d.boundary_length(),
                "euler_characteristic": d.euler_characteristic} for d in discs]
    _emit(args, dumps({"parent_area": surface.area, "discs": summary}))
    return 0


def cmd_enumerate(args):
    a, b, c = _sides(args)
    spec = build_isosceles(a, b, c)[0]
    spectrum = enumerate_closed_geodesics(spec, args.max_length)
    if args.format == "tsv":
        lines = ["m\tn\tlength"] + [f"{i.m}\t{i.n}\t{L:.17g}" for i, L in spectrum]
        _emit(args, "\n".join(lines) + "\n")
    else:
        # shortest class beyond the bound; (m, 1) classes are spaced by |E1|
        reach = args.max_length + 2 * sum(np.linalg.norm(e) for e in spec.translation_basis)
        beyond = [(i, L) for i, L in enumerate_closed_geodesics(spec, reach)
                  if L > args.max_length]
        nxt = {"m": beyond[0][0].m, "n": beyond[0][0].n, "length": beyond[0][1]}
        _emit(args, dumps({"spec": spec.to_dict(), "max_length": args.max_length,
                           "geodesics": [{"m": i.m, "n": i.n, "length": L}
                                         for i, L in spectrum],
                           "next": nxt}))
    return 0


def cmd_realize(args):
    a, b, c = _sides(args)
    spec, surface = build_isosceles(a, b, c)
    try:
        idx = LatticeGeodesicIndex(args.m, args.n, args.offset)
    except ValueError as exc:
        raise InputError(str(exc))
    path = realize_lattice_geodesic(spec, idx, surface)
    retraced = trace_geodesic(surface, path.start_point, path.start_direction,
                              path.total_length * (1 + 1e-9))
    out = path.to_dict()
    out["index"] = {"m": idx.m, "n": idx.n, "offset": path.meta["offset"]}
    out["check"] = check_realization(surface, path)
    out["retrace_closed"] = retraced.closed
    _emit(args, dumps(out))
    return 0


def cmd_reconstruct(args):
    surface = _read_surface(args.mesh)
    spec = reconstruct_from_flat_surface(surface)
    _emit(args, dumps(spec.to_dict()))
    return 0


def cmd_verify(args):
    surface = _read_surface(args.mesh)
    _positive(args.tol_angle, "--tol-angle")
    _positive(args.tol_length, "--tol-length")
    chosen = [name for name in ("comparison", "supplementary", "first_variation", "area")
              if args.all or getattr(args, name)]
    if not chosen:
        raise InputError("choose at least one check (or --all)")
    ta = args.tol_angle
    tl = args.tol_length
    runners = {
        "comparison": lambda: harness.check_comparison(
            surface, args.samples, args.seed, tol=ta or harness.COMPARISON_TOL),
        "supplementary": lambda: harness.check_supplementary(
            surface, args.samples, args.seed, tol=ta or harness.SUPPLEMENTARY_TOL),
        "first_variation": lambda: harness.check_first_variation(
            surface, args.samples, args.seed, tol=tl or harness.FIRST_VARIATION_TOL),
        "area": lambda: harness.check_area_comparison(
            surface, args.samples, args.seed, tol=tl or harness.AREA_TOL),
    }
    reports = [runners[name]() for name in chosen]
    _emit(args, dumps({"reports": [r.to_dict() for r in reports]}))
    return 0 if all(r.ok for r in reports) else 1


def cmd_lune(args):
    a, b, c = _sides(args)
    spec, surface = build_isosceles(a, b, c)
    if args.m is not None and args.n is not None:
        idx = LatticeGeodesicIndex(args.m, args.n)
    else:
        spectrum = enumerate_closed_geodesics(spec, args.min_length + 10 * max(a, b, c))
        longer = [i for i, L in spectrum if L >= args.min_length]
        if not longer:
            raise InputError("no closed geodesic reaches --min-length")
        idx = longer[0]
    path = realize_lattice_geodesic(spec, idx, surface)
    discs = split_along_paths(surface, [path]).components
    try:
        reports = [harness.lune_experiment(d, args.epsilon, surface.area, disc_id=i)
                   for i, d in enumerate(discs)]
    except ValueError as exc:
        raise InputError(str(exc))
    _emit(args, dumps({"geodesic": {"m": idx.m, "n": idx.n, "length": path.total_length},
                       "lunes": [r.to_dict() for r in reports]}))
    return 0


def cmd_search(args):
    surface = _read_surface(args.mesh)
    res = harness.long_geodesic_search(surface, args.max_length, args.grid, args.seed)
    _emit(args, dumps(res.to_dict()))
    return 0


def cmd_double(args):
    if args.polygon:
        pts = np.array(_floats(args.polygon, name="--polygon")).reshape(-1, 2)
    else:
        try:
            pts = np.loadtxt(args.input, ndmin=2)
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read polygon: {exc}")
    surface = double_polygon(pts)
    if args.format in ("json", "tsv"):
        _emit(args, dumps({"vertices": surface.vertices, "faces": surface.faces}))
    else:
        _emit(args, surface.to_off())
    return 0


# parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the result here instead of stdout")
    common.add_argument("--format", choices=("json", "off", "tsv"), default=None,
                        help="json unless stated otherwise (double writes OFF)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--depth", type=int, default=32)
    common.add_argument("--tol-angle", type=float, default=None)
    common.add_argument("--tol-length", type=float, default=None)

    p = argparse.ArgumentParser(prog="geodeck", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("curvature", parents=[common], help="angle defects of an OFF mesh")
    s.add_argument("mesh")
    s.set_defaults(func=cmd_curvature)

    s = sub.add_parser("trace", parents=[common], help="trace a straightest line")
    s.add_argument("mesh")
    s.add_argument("--start", required=True, help="FACE:b0,b1,b2")
    s.add_argument("--direction", required=True, help="dx,dy in the face frame")
    s.add_argument("--length", type=float, required=True)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("distance", parents=[common], help="intrinsic distance between points")
    s.add_argument("mesh")
    s.add_argument("--from", dest="source", required=True, help="v:INDEX or FACE:b0,b1,b2")
    s.add_argument("--to", dest="target", required=True)
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("cut", parents=[common], help="cut a mesh along a path from trace")
    s.add_argument("mesh")
    s.add_argument("--path", required=True, help="path JSON as written by trace")
    s.set_defaults(func=cmd_cut)

    s = sub.add_parser("enumerate", parents=[common], help="closed geodesics of an isosceles tetrahedron")
    s.add_argument("--sides", required=True)
    s.add_argument("--max-length", type=float, required=True)
    s.set_defaults(func=cmd_enumerate)

    s = sub.add_parser("realize", parents=[common], help="build one lattice closed geodesic")
    s.add_argument("--sides", required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--offset", type=float, default=0.5)
    s.set_defaults(func=cmd_realize)

    s = sub.add_parser("reconstruct", parents=[common], help="recover the face triangle")
    s.add_argument("mesh")
    s.set_defaults(func=cmd_reconstruct)

    s = sub.add_parser("verify", parents=[common], help="run property checks")
    s.add_argument("mesh")
    s.add_argument("--comparison", action="store_true")
    s.add_argument("--supplementary", action="store_true")
    s.add_argument("--first-variation", dest="first_variation", action="store_true")
    s.add_argument("--area", action="store_true")
    s.add_argument("--all", action="store_true")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("lune", parents=[common], help="lune experiment on a long geodesic cut")
    s.add_argument("--sides", required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--min-length", type=float, default=50.0)
    s.add_argument("--epsilon", type=float, default=0.1)
    s.set_defaults(func=cmd_lune)

    s = sub.add_parser("search", parents=[common], help="sweep for long simple closed geodesics")
    s.add_argument("mesh")
    s.add_argument("--max-length", type=float, required=True)
    s.add_argument("--grid", type=int, default=64)
    s.set_defaults(func=cmd_search)

    s = sub.add_parser("double", parents=[common], help="doubled convex polygon as OFF")
    s.add_argument("input", nargs="?", help="text file with one x y pair per line")
    s.add_argument("--polygon", help="x0,y0;x1,y1;...")
    s.set_defaults(func=cmd_double)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.samples < 1:
            raise InputError("--samples must be at least 1")
        return args.func(args)
    except (InputError, SurfaceError, ValueError) as exc:
        print(f"geodeck: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
