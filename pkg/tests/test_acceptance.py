"""Acceptance criteria, one test each, with every tolerance pinned here.

Each test records a ``CRITERION n PASS/FAIL`` line (also repeated in the
terminal summary) before asserting.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from metrictrees import io as mio
from metrictrees.cli import main
from metrictrees.gallery import euclidean_lens_diameter, generate, lens_blowup_curve
from metrictrees.hyperbolicity import four_point_delta, space_thinness
from metrictrees.lens import diamond_scan, find_lens_violation, rescale_sweep
from metrictrees.lipschitz import (SampledLoop, ScalarField, bicombing_check, boundary_cycle,
                                   bump_field, coordinate_field, cone_extension,
                                   degeneracy_field, distance_field, identity_disc_map,
                                   loop_integral, loop_through, md_field, seminorm_check,
                                   stokes_check)
from metrictrees.space import geodesicity_defect

from conftest import acceptance_tree

pytestmark = pytest.mark.acceptance

TREE_SEEDS = range(1, 26)
TREE_N = 60
RUNTIME_LIMIT_S = 60.0
LENS_SAMPLES = 100_000
LENS_REL_TOL = 0.01
RATIO_ABS_TOL = 1e-6
LOOP_ZERO_TOL = 1e-12
CONE_GRID = 32  # lip_est grows like quantum / h on finer grids
MD_IDENTITY_GRID = 64
MD_CONE_GRID = 128  # coarser grids resolve the r = 1/2 and sector kinks too poorly
MD_TAU = 0.1
MD_FRACTION = 0.95
STOKES_PI_REL_TOL = 0.05
STOKES_GRIDS = (32, 64, 128)
STOKES_MIN_ORDER = 1.0
STOKES_CONE_C = 1.0
RESCALE_SCALES = (1, 2, 4, 8)
RESCALE_C = 1.0  # one base edge; see the small-c note in the gallery tests
SNOWFLAKE_DEFECT = 0.4


def cone_cases(n=40, count=10, waypoints=4):
    """Ten tree loops through random waypoints, based at their first sample."""
    rng = np.random.default_rng(0)
    for seed in range(1, count + 1):
        T = generate({"kind": "random_tree", "n": n, "seed": seed})
        loop = loop_through(T, rng.choice(n, waypoints, replace=False))
        yield T, loop, loop.points[0]


def test_criterion_01_tree_certification(criterion):
    t0 = time.perf_counter()
    worst4 = worst_thin = 0.0
    exact = True
    for seed in TREE_SEEDS:
        T = acceptance_tree(seed, TREE_N)
        d4 = four_point_delta(T)
        thin = space_thinness(T, budget=10 ** 9)
        exact &= d4.exact and thin.exact
        worst4 = max(worst4, d4.delta)
        worst_thin = max(worst_thin, thin.delta)
    elapsed = time.perf_counter() - t0
    ok = exact and worst4 == 0 and worst_thin == 0 and elapsed <= RUNTIME_LIMIT_S
    criterion(1, "tree certification", ok,
              f"25 trees n={TREE_N}: max delta4={worst4}, max thinness={worst_thin}, "
              f"exhaustive={exact}, {elapsed:.1f}s <= {RUNTIME_LIMIT_S:.0f}s")
    assert ok


def test_criterion_02_lens_property_on_trees(criterion):
    worst = {"gap": 0.0, "inner": 0.0, "outer": 0.0}
    strict_inner_failures = 0
    ok = True
    for seed in TREE_SEEDS:
        T = acceptance_tree(seed, TREE_N)
        q = T.quantum
        prof = diamond_scan(T, pair_budget=10 ** 12, with_witness=True)
        ws = prof.witness_stats
        ok &= prof.exhaustive
        ok &= prof.sup_gap_add <= q and ws["sup_inner_excess"] <= q and ws["sup_outer_delta"] <= q
        worst["gap"] = max(worst["gap"], prof.sup_gap_add / q)
        worst["inner"] = max(worst["inner"], ws["sup_inner_excess"] / q)
        worst["outer"] = max(worst["outer"], ws["sup_outer_delta"] / q)
        strict_inner_failures += ws["inner_failures"]
    criterion(2, "lens property on trees", ok,
              f"in quanta: sup_gap_add<={worst['gap']:.2f}, inner excess<={worst['inner']:.2f}, "
              f"outer delta<={worst['outer']:.2f}; allowance 1 quantum; "
              f"{strict_inner_failures} witnesses have nonzero inner excess")
    assert ok


def test_criterion_03_lens_failure_off_trees(criterion):
    prof = diamond_scan(generate({"kind": "grid", "rows": 5, "cols": 5}))
    w = prof.worst_lambda
    v = find_lens_violation(generate({"kind": "grid", "rows": 9, "cols": 9}))
    ok = prof.sup_lambda_mult > 1 and w is not None and v is not None and not v.passed
    detail = f"5x5 sup_lambda_mult={prof.sup_lambda_mult} (finite sup {prof.sup_lambda_mult_finite})"
    if w is not None:
        b1, b2 = w.balls
        detail += f" at B({b1.center},{b1.radius:g}) & B({b2.center},{b2.radius:g})"
    if v is not None:
        detail += f"; 9x9 violation {v.params} diam={v.diam} > {v.bound}"
    criterion(3, "lens failure off trees", ok, detail)
    assert ok


def test_criterion_04_euclidean_lens_formula(criterion):
    errs = {}
    for h in (0.5, 0.1, 0.01):
        out = euclidean_lens_diameter(1.0, h, samples=LENS_SAMPLES, seed=0)
        errs[h] = abs(out["sampled"] - out["closed_form"]) / out["closed_form"]
    curve = lens_blowup_curve(1.0, [0.5, 0.1, 0.05, 0.01, 0.005])
    ratios = [r for _, _, r in curve]
    increasing = all(a < b for a, b in zip(ratios, ratios[1:]))
    last = abs(ratios[-1] - 2 * math.sqrt(2 / 0.005 + 1))
    ok = max(errs.values()) <= LENS_REL_TOL and increasing and last <= RATIO_ABS_TOL
    criterion(4, "euclidean lens formula", ok,
              "rel errors " + ", ".join(f"h={h}: {e:.2%}" for h, e in errs.items())
              + f"; ratios increasing={increasing}; ratio(0.005)={ratios[-1]:.6f}, |err|={last:.1e}")
    assert ok


def test_criterion_05_loop_integrals(criterion):
    rng = np.random.default_rng(5)
    worst = 0.0
    for k in range(100):
        T = generate({"kind": "random_tree", "n": 30, "seed": 100 + k})
        if k % 2:
            loop = loop_through(T, rng.choice(T.n, int(rng.integers(2, 6)), replace=False))
        else:
            # random walk out and straight back
            walk = [int(rng.integers(T.n))]
            nbrs = [np.flatnonzero(T.skeleton[i]) for i in range(T.n)]
            for _ in range(int(rng.integers(1, 20))):
                walk.append(int(rng.choice(nbrs[walk[-1]])))
            loop = SampledLoop(tuple(walk + walk[-2::-1]))
        S = rng.choice(T.n, 3, replace=False)
        f = bump_field(T, S, float(rng.uniform(0.5, 5)))
        pi = distance_field(T, int(rng.integers(T.n)))
        worst = max(worst, abs(loop_integral(loop, f, pi).value))
    c4 = loop_integral(SampledLoop((0, 1, 2, 3, 0)), ScalarField([0, 1, 0, 0], 1),
                       ScalarField([0, 1, 2, 1], 1)).value
    ok = worst <= LOOP_ZERO_TOL and c4 == 1.0
    criterion(5, "loop integrals", ok, f"100 retraced tree loops: max |integral|={worst:.1e}; "
              f"4-cycle example={c4!r}")
    assert ok


def test_criterion_06_cone_extension(criterion):
    ok = True
    worst_ratio = 0.0
    for T, loop, x0 in cone_cases():
        smap = cone_extension(T, loop, x0, CONE_GRID)
        g = smap.grid
        cyc = boundary_cycle(g)
        xy = g.coords()
        theta = np.arctan2(xy[cyc[:, 0], cyc[:, 1], 1], xy[cyc[:, 0], cyc[:, 1], 0])
        expected = np.array(loop.points)[loop.nearest_sample(theta)]
        boundary_ok = np.array_equal(smap.values[cyc[:, 0], cyc[:, 1]], expected)
        r = np.hypot(xy[..., 0], xy[..., 1])
        inner_ok = bool(np.all(smap.values[g.mask & (r <= 0.5)] == x0))
        bound = 20 * loop.lip(T) + 2 * g.h
        worst_ratio = max(worst_ratio, smap.lip_est / bound)
        ok &= boundary_ok and inner_ok and smap.lip_est <= bound
    criterion(6, "cone extension", ok,
              f"10 tree loops at grid_n={CONE_GRID}: boundary and inner half-disc exact; "
              f"max lip_est / (20 lip + 2h) = {worst_ratio:.3f}")
    assert ok


def test_criterion_07_bicombing(criterion):
    rng = np.random.default_rng(7)
    triples = 0
    worst = 0.0
    strong_fail = 0
    ok = True
    for seed in TREE_SEEDS:
        T = acceptance_tree(seed, TREE_N)
        for x, y, y2 in rng.integers(0, T.n, (400, 3)):
            out = bicombing_check(T, x, y, y2)
            triples += 1
            ok &= out["max_dev"] <= 4 * out["dist_yy"]
            strong_fail += out["max_dev"] > out["dist_yy"]
            if out["dist_yy"] > 0:
                worst = max(worst, out["max_dev"] / out["dist_yy"])
    criterion(7, "bicombing on trees", ok,
              f"{triples} triples: max max_dev/d(y,y')={worst:.3f} <= 4; "
              f"stronger <= d(y,y') fails on {strong_fail}")
    assert ok


def test_criterion_08_metric_derivative(criterion):
    ident = md_field(identity_disc_map(MD_IDENTITY_GRID))
    md_err = float(np.abs(ident.md - 1.0).max())
    id_ok = (ident.md.shape[1] == 16 and md_err <= 2 * ident.h
             and degeneracy_field(ident, MD_TAU)["fraction_degenerate"] == 0.0
             and seminorm_check(ident)["fraction_within_tol"] >= MD_FRACTION)
    degen, semi = [], []
    for T, loop, x0 in cone_cases():
        F = md_field(cone_extension(T, loop, x0, MD_CONE_GRID))
        degen.append(degeneracy_field(F, MD_TAU)["fraction_degenerate"])
        semi.append(seminorm_check(F)["fraction_within_tol"])
    cone_ok = min(degen) >= MD_FRACTION and min(semi) >= MD_FRACTION
    ok = id_ok and cone_ok
    criterion(8, "metric derivative diagnostics", ok,
              f"identity N={MD_IDENTITY_GRID}: max |md-1|={md_err:.1e} <= 2h={2 * ident.h:.3f}; "
              f"cones N={MD_CONE_GRID}: min degeneracy={min(degen):.3f}, "
              f"min seminorm fraction={min(semi):.3f}")
    assert ok


def test_criterion_09_stokes(criterion):
    errs = []
    at64 = None
    for n in STOKES_GRIDS:
        smap = identity_disc_map(n)
        out = stokes_check(smap, coordinate_field(smap.space, 0), coordinate_field(smap.space, 1))
        e = max(abs(out["boundary_integral"] - math.pi), abs(out["area_integral"] - math.pi))
        errs.append((out["h"], e))
        if n == 64:
            at64 = e / math.pi
    hs, es = np.log([h for h, _ in errs]), np.log([e for _, e in errs])
    order = float(np.polyfit(hs, es, 1)[0])
    C = 0.0
    for T, loop, x0 in cone_cases():
        smap = cone_extension(T, loop, x0, 64)
        out = stokes_check(smap, bump_field(T, {loop.points[len(loop) // 3]}, 3.0),
                           distance_field(T, loop.points[len(loop) // 2]))
        C = max(C, max(abs(out["boundary_integral"]), abs(out["area_integral"])) / out["h"])
    ok = at64 <= STOKES_PI_REL_TOL and order >= STOKES_MIN_ORDER and C <= STOKES_CONE_C
    criterion(9, "stokes consistency", ok,
              f"identity rel error at N=64: {at64:.2%}; order {order:.2f} over N={STOKES_GRIDS}; "
              f"tree cones: max |integral| / h = {C:.1e} <= C={STOKES_CONE_C}")
    assert ok


def test_criterion_10_rescale_sweep(criterion):
    ok = True
    worst = 0.0
    for seed in range(1, 6):
        sp = generate({"kind": "perturbed_tree", "n": 30, "seed": seed, "c": RESCALE_C,
                       "weight_range": [1, 1]})
        for sigma, prof in rescale_sweep(sp, RESCALE_SCALES):
            env = 4 * RESCALE_C / sigma
            ok &= prof.sup_gap_add <= env
            worst = max(worst, prof.sup_gap_add / env)
    grid = rescale_sweep(generate({"kind": "grid", "rows": 5, "cols": 5}), RESCALE_SCALES)
    lams = [p.sup_lambda_mult for _, p in grid]
    ok &= all(lam > 1 for lam in lams)
    criterion(10, "rescale sweep", ok,
              f"perturbed trees c={RESCALE_C}: max gap / (4c/sigma) = {worst:.3f}; "
              f"grid sup_lambda_mult over sigma={RESCALE_SCALES}: {lams}")
    assert ok


def test_criterion_11_snowflake(criterion):
    snow = generate({"kind": "snowflake_line", "n": 33})
    prof = diamond_scan(snow, pair_budget=10 ** 12)
    defect = geodesicity_defect(snow)
    ok = prof.exhaustive and prof.sup_gap_add == 0 and defect > SNOWFLAKE_DEFECT
    detail = f"sup_gap_add={prof.sup_gap_add:.4f}, geodesicity defect={defect:.3f}"
    if prof.worst_gap is not None:
        b1, b2 = prof.worst_gap.balls
        detail += (f"; worst lens B({b1.center},{b1.radius:.4f}) & B({b2.center},{b2.radius:.4f})"
                   f" = {sorted(prof.worst_gap.intersection)}")
    criterion(11, "snowflake lenses are balls", ok, detail)
    assert ok


def _cli_cases(tmp_path):
    tree = tmp_path / "tree.json"
    tree.write_text(mio.dumps({"kind": "generator", "spec": {"kind": "random_tree", "n": 30, "seed": 4}}))
    grid = tmp_path / "grid.json"
    grid.write_text(mio.dumps({"kind": "generator", "spec": {"kind": "grid", "rows": 6, "cols": 6}}))
    T = mio.load_space(tree)
    loop = loop_through(T, [0, 9, 17, 25])
    (tmp_path / "loop.json").write_text(mio.dumps(mio.loop_to_obj(loop, "tree.json")))
    (tmp_path / "f.json").write_text(mio.dumps(mio.field_to_obj(bump_field(T, {9}, 3.0))))
    (tmp_path / "pi.json").write_text(mio.dumps(mio.field_to_obj(distance_field(T, 17))))
    assert main(["cone", str(tree), "--loop", str(tmp_path / "loop.json"), "--base", "0",
                 "--map-out", str(tmp_path / "map.json")]) == 0
    t, g, lp, m = str(tree), str(grid), str(tmp_path / "loop.json"), str(tmp_path / "map.json")
    f, pi = str(tmp_path / "f.json"), str(tmp_path / "pi.json")
    return {
        "validate": ["validate", t],
        "hyperbolicity": ["hyperbolicity", g, "--budget", "500", "--seed", "3"],
        "tree-check": ["tree-check", t, "--corroborate"],
        "lens-scan": ["lens-scan", g, "--pairs", "2000", "--seed", "1", "--witness"],
        "witness": ["witness", t, "--x", "0", "--y", "25", "--r", "6", "--s", "5"],
        "lens-bound": ["lens-bound", g, "--x", "0", "--y", "14", "--t", "0.5", "--h", "1"],
        "loop-integral": ["loop-integral", t, "--loop", lp, "--f", f, "--pi", pi],
        "cone": ["cone", t, "--loop", lp, "--base", "0"],
        "md-field": ["md-field", "--map", m],
        "stokes": ["stokes", "--map", m, "--f", f, "--pi", pi],
        "lens-demo": ["lens-demo", "--h-list", "0.5,0.05", "--samples", "20000", "--seed", "2"],
        "rescale": ["rescale", t, "--scales", "1,2,4"],
        "generate": ["generate", "--spec", '{"kind": "cycle", "n": 9}', "--space-out",
                     str(tmp_path / "gen.json")],
    }


def test_criterion_12_determinism(criterion, tmp_path, capsys):
    cases = _cli_cases(tmp_path)
    capsys.readouterr()
    differing = []
    for name, args in cases.items():
        outs = []
        for threads in (1, 8):
            main(args + ["--threads", str(threads)])
            outs.append(capsys.readouterr().out.encode())
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name)
    # separate processes, so nothing is shared through caches in memory
    for name in ("lens-scan", "hyperbolicity", "md-field"):
        outs = [subprocess.run([sys.executable, "-m", "metrictrees.cli", *cases[name],
                                "--threads", str(t)], capture_output=True).stdout
                for t in (1, 8)]
        if outs[0] != outs[1] or not outs[0]:
            differing.append(name + " (subprocess)")
    ok = not differing
    criterion(12, "determinism", ok,
              f"{len(cases)} commands, threads 1 vs 8, byte-identical"
              + (f"; differing: {differing}" if differing else ""))
    assert ok
