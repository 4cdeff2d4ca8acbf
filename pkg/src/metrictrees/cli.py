"""Command line front end.

Every command prints one JSON report (or writes it to ``--out``). Exit codes:
0 success, 1 a checked bound was violated, 2 bad input or parameters.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import io as mio
from ._parallel import set_default_threads
from .errors import MetricTreesError
from .gallery import euclidean_lens_diameter, generate, lens_blowup_curve
from .hyperbolicity import DEFAULT_BUDGET, certify_tree, four_point_delta, space_thinness
from .lens import (DEFAULT_PAIR_BUDGET, diamond_scan, hyp_distortion_witness,
                   lens_diameter_check, rescale_sweep)
from .lipschitz import (cone_extension, degeneracy_field, identity_disc_map, loop_integral,
                        md_field, seminorm_check, stokes_check)
from .space import BALL_TOL, DEFAULT_TOL

SCHEMA = 1


class Outcome:
    def __init__(self, result, passed=True, allowances=None, csv_rows=None, csv_header=None):
        self.result = result
        self.passed = passed
        self.allowances = allowances or {}
        self.csv_rows = csv_rows
        self.csv_header = csv_header


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _pairs(text):
    if text == "all":
        return None
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--pairs takes an integer or 'all'") from None
    if v < 1:
        raise argparse.ArgumentTypeError("--pairs must be >= 1")
    return v


def _scan_kwargs(a):
    budget = DEFAULT_PAIR_BUDGET if a.pairs is False else (a.pairs or 10 ** 18)
    radii = "auto" if a.radii == "auto" else _floats(a.radii)
    return dict(radius_grid=radii, pair_budget=budget, seed=a.seed,
                restrict_far=a.restrict_far, with_witness=a.witness)


def cmd_validate(a):
    sp = mio.load_space(a.space)
    return Outcome({"valid": True, "n": sp.n, "diameter": sp.diameter, "quantum": sp.quantum})


def cmd_hyperbolicity(a):
    sp = mio.load_space(a.space)
    res = {}
    if a.mode in ("thin", "both"):
        res["thin"] = space_thinness(sp, budget=a.budget, seed=a.seed, geodesic_mode=a.geodesics)
    if a.mode in ("4pt", "both"):
        res["four_point"] = four_point_delta(sp, budget=a.budget, seed=a.seed)
    return Outcome(res, allowances={"quantum": sp.quantum, "thinness": 2 * sp.quantum})


def cmd_tree_check(a):
    sp = mio.load_space(a.space)
    cert = certify_tree(sp, tol=a.tol, corroborate=a.corroborate)
    return Outcome(cert, passed=cert.is_tree)


def cmd_lens_scan(a):
    sp = mio.load_space(a.space)
    prof = diamond_scan(sp, **_scan_kwargs(a))
    rows = [[nu, R, c] for nu, R, c in prof.histogram]
    return Outcome(prof, allowances={"quantum": sp.quantum},
                   csv_rows=rows, csv_header=["nu", "R", "count"])


def cmd_witness(a):
    sp = mio.load_space(a.space)
    w = hyp_distortion_witness(sp, a.x, a.r, a.y, a.s)
    return Outcome(w, passed=w.inner_excess <= sp.quantum, allowances={"quantum": sp.quantum})


def cmd_lens_bound(a):
    sp = mio.load_space(a.space)
    chk = lens_diameter_check(sp, a.x, a.y, a.t, a.h, a.lam)
    return Outcome(chk, passed=chk.passed, allowances={"quantum": chk.allowance})


def cmd_loop_integral(a):
    sp = mio.load_space(a.space)
    loop, _ = mio.load_loop(a.loop)
    sp.check_index(*loop.points)
    f = mio.load_field(a.f).validate(sp)
    pi = mio.load_field(a.pi).validate(sp)
    li = loop_integral(loop, f, pi)
    rows = [[i, float(s)] for i, s in enumerate(li.segments)]
    return Outcome({"value": li.value, "segments": li.segments, "length": len(loop)},
                   csv_rows=rows, csv_header=["segment", "contribution"])


def cmd_cone(a):
    sp = mio.load_space(a.space)
    loop, _ = mio.load_loop(a.loop)
    smap = cone_extension(sp, loop, a.base, a.grid)
    lip_loop = loop.lip(sp)
    bound = (8 * a.lam + 12) * lip_loop + 2 * smap.grid.h
    res = {"grid_n": a.grid, "h": smap.grid.h, "base": a.base, "lambda": a.lam,
           "lip_loop": lip_loop, "lip_est": smap.lip_est, "bound": bound,
           "pass": smap.lip_est <= bound}
    if a.map_out:
        ref = str(Path(a.space).resolve())
        Path(a.map_out).write_text(mio.dumps(mio.map_to_obj(smap, ref)))
        res["map_file"] = a.map_out
    return Outcome(res, passed=res["pass"], allowances={"grid": 2 * smap.grid.h})


def cmd_disc_map(a):
    smap = identity_disc_map(a.grid, a.norm)
    Path(a.out_map).write_text(mio.dumps(mio.map_to_obj(smap)))
    return Outcome({"grid_n": a.grid, "norm": a.norm, "nodes": int(smap.grid.mask.sum()),
                    "map_file": a.out_map})


def cmd_md_field(a):
    smap = mio.load_map(a.map)
    F = md_field(smap, directions=a.dirs, scales=tuple(int(s) for s in _floats(a.scales)))
    sn = seminorm_check(F)
    sn.pop("per_node")
    dg = degeneracy_field(F, a.tau)
    dg.pop("mask")
    return Outcome({"field": F.summary(), "seminorm": sn, "degeneracy": dg},
                   allowances={"estimator_tol": F.tol})


def cmd_stokes(a):
    smap = mio.load_map(a.map)
    f = mio.load_field(a.f).validate(smap.space)
    pi = mio.load_field(a.pi).validate(smap.space)
    return Outcome(stokes_check(smap, f, pi))


def cmd_lens_demo(a):
    curve = lens_blowup_curve(a.r1, a.h_list)
    sampled = [euclidean_lens_diameter(a.r1, h, samples=a.samples, seed=a.seed) for h in a.h_list]
    rows = [[h, d, r] for h, d, r in curve]
    return Outcome({"r1": a.r1, "curve": [{"h": h, "diam": d, "ratio": r} for h, d, r in curve],
                    "sampled": sampled}, csv_rows=rows, csv_header=["h", "diam", "ratio"])


def cmd_rescale(a):
    sp = mio.load_space(a.space)
    sweep = rescale_sweep(sp, a.scales, **_scan_kwargs(a))
    rows = [[s, p.sup_gap_add, p.sup_lambda_mult] for s, p in sweep]
    return Outcome({"sweep": [p for _, p in sweep]}, allowances={"quantum": sp.quantum},
                   csv_rows=rows, csv_header=["sigma", "sup_gap_add", "sup_lambda_mult"])


def cmd_generate(a):
    spec = mio.parse_spec_arg(a.spec)
    sp = generate(spec)
    obj = mio.space_to_obj(sp)
    obj["generator"] = spec.to_dict()
    Path(a.out_space).write_text(mio.dumps(obj))
    return Outcome({"spec": spec.to_dict(), "n": sp.n, "file": a.out_space})


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="metrictrees", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="also write flat plot data to this CSV file")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    common.add_argument("--timing", action="store_true", help="add wall time to the report")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, space=True):
        sp = sub.add_parser(name, parents=[common], help=help_)
        if space:
            sp.add_argument("space", help="matrix .csv, space .json, or edge list")
        sp.set_defaults(fn=fn)
        return sp

    add("validate", cmd_validate, "check that a file describes a metric")

    s = add("hyperbolicity", cmd_hyperbolicity, "triangle thinness and four-point delta")
    s.add_argument("--mode", choices=["thin", "4pt", "both"], default="both")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--geodesics", default="canonical", help="canonical | exhaustive[:CAP]")

    s = add("tree-check", cmd_tree_check, "exact four-point tree test (exit 1 if not a tree)")
    s.add_argument("--tol", type=float, default=DEFAULT_TOL)
    s.add_argument("--corroborate", action="store_true", help="also run exhaustive thinness")

    def scan_flags(s):
        s.add_argument("--radii", default="auto", help="auto | r1,r2,...")
        s.add_argument("--pairs", type=_pairs, default=False, help="sample budget, or 'all'")
        s.add_argument("--restrict-far", dest="restrict_far", action="store_true", default=True)
        s.add_argument("--no-restrict-far", dest="restrict_far", action="store_false")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--witness", action="store_true", help="run the constructive witness too")

    scan_flags(add("lens-scan", cmd_lens_scan, "distortion of all two-ball intersections"))

    s = add("witness", cmd_witness, "constructive inscribed ball for one ball pair")
    for f in ("--x", "--y"):
        s.add_argument(f, type=int, required=True)
    for f in ("--r", "--s"):
        s.add_argument(f, type=float, required=True)

    s = add("lens-bound", cmd_lens_bound, "diameter bound for a lens around a geodesic point")
    s.add_argument("--x", type=int, required=True)
    s.add_argument("--y", type=int, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--h", type=float, required=True)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)

    s = add("loop-integral", cmd_loop_integral, "trapezoid integral of f d(pi) around a loop")
    s.add_argument("--loop", required=True)
    s.add_argument("--f", required=True)
    s.add_argument("--pi", required=True)

    s = add("cone", cmd_cone, "geodesic cone filling of a loop")
    s.add_argument("--loop", required=True)
    s.add_argument("--base", type=int, required=True)
    s.add_argument("--grid", type=int, default=32)
    s.add_argument("--lambda", dest="lam", type=float, default=1.0)
    s.add_argument("--map-out", dest="map_out", help="write the map file here")

    s = add("disc-map", cmd_disc_map, "identity map of the disc grid (map file)", space=False)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--norm", choices=["l1", "l2", "linf"], default="l2")
    s.add_argument("--map-out", dest="out_map", required=True)

    s = add("md-field", cmd_md_field, "metric-derivative diagnostics of a map", space=False)
    s.add_argument("--map", required=True)
    s.add_argument("--dirs", type=int, default=16)
    s.add_argument("--scales", default="4,2", help="ladder in grid steps")
    s.add_argument("--tau", type=float, default=0.1)

    s = add("stokes", cmd_stokes, "boundary integral against the Jacobian area sum", space=False)
    s.add_argument("--map", required=True)
    s.add_argument("--f", required=True)
    s.add_argument("--pi", required=True)

    s = add("lens-demo", cmd_lens_demo, "planar lens diameters and blow-up ratios", space=False)
    s.add_argument("--r1", type=float, default=1.0)
    s.add_argument("--h-list", dest="h_list", type=_floats, required=True)
    s.add_argument("--samples", type=int, default=100_000)
    s.add_argument("--seed", type=int, default=0)

    s = add("rescale", cmd_rescale, "lens scans of d / sigma")
    s.add_argument("--scales", type=_floats, required=True)
    scan_flags(s)

    s = add("generate", cmd_generate, "write a generated space file", space=False)
    s.add_argument("--spec", required=True, help="inline JSON or a JSON file")
    s.add_argument("--space-out", dest="out_space", help="space file to write (default: --out)")
    return p


def _config(a) -> dict:
    skip = {"fn", "out", "csv", "threads", "timing", "command"}
    return {k: v for k, v in sorted(vars(a).items()) if k not in skip}


def _emit(report: dict, a) -> None:
    text = mio.dumps(report)
    if getattr(a, "out", None) and not (a.command == "generate" and a.out == a.out_space):
        Path(a.out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code not in (0, None) else 0
    if a.command == "generate" and not a.out_space:
        if not a.out:
            parser.error("generate needs --out or --space-out")
        a.out_space = a.out
    set_default_threads(a.threads)
    base = {"schema": SCHEMA, "command": a.command, "version": __version__,
            "config": _config(a), "tolerances": {"metric": DEFAULT_TOL, "ball": BALL_TOL}}
    t0 = time.perf_counter()
    try:
        out = a.fn(a)
    except (MetricTreesError, ValueError, OSError) as e:
        err = e.to_dict() if isinstance(e, MetricTreesError) else \
            {"type": type(e).__name__, "message": str(e)}
        _emit({**base, "status": "error", "error": err}, a)
        return 2
    report = {**base, "status": "ok" if out.passed else "violation",
              "result": out.result, "allowances": out.allowances}
    if a.timing:
        report["wall_time_s"] = time.perf_counter() - t0
    _emit(report, a)
    if a.csv and out.csv_rows is not None:
        buf = _io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(out.csv_header)
        for row in out.csv_rows:
            w.writerow([repr(float(v)) if isinstance(v, float) and math.isfinite(v) else v
                        for v in row])
        Path(a.csv).write_text(buf.getvalue())
    return 0 if out.passed else 1


if __name__ == "__main__":
    sys.exit(main())
