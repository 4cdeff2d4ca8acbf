"""Two-ball intersections ("lenses") and how far they are from being balls.

For a lens ``K = B(x, r) & B(y, s)`` we compute the largest ball centred in
the space that fits inside ``K`` (radius ``nu*``) and the smallest ball that
contains it (radius ``R*``). ``R*/nu*`` and ``R* - nu*`` are the
multiplicative and additive distortions; both vanish (ratio 1, gap 0) when
the lens is itself a ball.

Radii are restricted to realised distances: on a finite space a closed ball
only changes when its radius crosses one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._parallel import run_chunked
from .errors import EmptyIntersection, ParameterOutOfRange
from .hyperbolicity import _nearest
from .space import BALL_TOL, Ball, FiniteMetricSpace, ball_mask, geodesic, set_diameter

__all__ = [
    "DistortionProfile",
    "HypWitness",
    "LensBoundCheck",
    "LensReport",
    "alt_hypothesis_check",
    "best_inner_ball",
    "best_outer_ball",
    "diamond_scan",
    "find_lens_violation",
    "hyp_distortion_witness",
    "intersect_balls",
    "lens_diameter_check",
    "lens_report",
    "rescale_sweep",
]

DEFAULT_PAIR_BUDGET = 5_000_000


def _as_mask(space, K) -> np.ndarray:
    if isinstance(K, np.ndarray) and K.dtype == bool:
        return K
    m = np.zeros(space.n, dtype=bool)
    idx = list(K)
    if idx:
        space.check_index(*idx)
        m[idx] = True
    return m


def _lambda_gap(nu: float, R: float) -> tuple[float, float]:
    if R == 0.0:
        return 1.0, 0.0
    lam = math.inf if nu <= 0.0 else R / nu
    return lam, R - nu


def intersect_balls(space: FiniteMetricSpace, b1: Ball, b2: Ball) -> frozenset:
    """Members of ``b1 & b2`` (possibly empty)."""
    m = ball_mask(space, b1) & ball_mask(space, b2)
    return frozenset(int(i) for i in np.flatnonzero(m))


def best_inner_ball(space: FiniteMetricSpace, K, tau: float = BALL_TOL) -> tuple[int, float]:
    """Largest realised-radius ball ``B(z, nu)`` inside ``K``; ties to the smallest ``z``."""
    mask = _as_mask(space, K)
    if not mask.any():
        raise EmptyIntersection("best_inner_ball needs a non-empty set")
    D = space.dist
    outside = np.where(mask[None, :], np.inf, D)
    r_out = outside.min(axis=1)
    fits = D + tau < r_out[:, None]
    nu = np.where(fits, D, -np.inf).max(axis=1)
    nu[~mask] = -np.inf
    z = int(np.argmax(nu))
    return z, float(nu[z])


def best_outer_ball(space: FiniteMetricSpace, K) -> tuple[int, float]:
    """Smallest ball ``B(z', R)`` containing ``K``; ties to the smallest ``z'``."""
    mask = _as_mask(space, K)
    if not mask.any():
        raise EmptyIntersection("best_outer_ball needs a non-empty set")
    R = space.dist[:, mask].max(axis=1)
    z = int(np.argmin(R))
    return z, float(R[z])


@dataclass
class HypWitness:
    """Constructive inscribed ball for ``B(x,r) & B(y,s)``, placed on the x-y geodesic."""

    x: int
    r: float
    y: int
    s: float
    z: int
    nu: float
    inner_ok: bool
    inner_excess: float  # how far B(z, nu) reaches outside K
    outer_delta_needed: float  # least delta' with K inside B(z, nu + delta')
    degenerate: bool  # r - s > d, so K = B(y, s)
    quantum: float

    def to_dict(self):
        return dict(self.__dict__)


def hyp_distortion_witness(space: FiniteMetricSpace, x: int, r: float, y: int, s: float,
                           tau: float = BALL_TOL) -> HypWitness:
    """Inscribed ball at arc length ``(r - s + d)/2`` from the larger ball's centre.

    The balls are swapped internally so that ``r >= s``; the reported
    ``x, r, y, s`` are after the swap.
    """
    space.check_index(x, y)
    D = space.dist
    if not (D[x] <= r + tau).__and__(D[y] <= s + tau).any():
        raise EmptyIntersection(f"B({x},{r:g}) and B({y},{s:g}) do not meet",
                                x=int(x), r=float(r), y=int(y), s=float(s))
    if r < s:
        x, y, r, s = y, x, s, r
    d = D[x, y]
    degenerate = r - s > d
    if degenerate:
        z, nu = int(y), float(s)
    else:
        t = min(max(0.5 * (r - s + d), 0.0), d)
        z = _nearest(geodesic(space, x, y), t)
        nu = max(0.0, 0.5 * (r + s - d))
    inner_ball = D[z] <= nu + tau
    excess = np.maximum(D[x] - r, D[y] - s)[inner_ball]
    inner_excess = max(0.0, float(excess.max()))
    K = (D[x] <= r + tau) & (D[y] <= s + tau)
    outer = max(0.0, float((D[z, K] - nu).max()))
    return HypWitness(int(x), float(r), int(y), float(s), int(z), float(nu),
                      inner_excess <= tau, inner_excess, outer, bool(degenerate), space.quantum)


@dataclass
class LensReport:
    balls: tuple
    intersection: frozenset
    inner: tuple  # (z, nu*)
    outer: tuple  # (z', R*)
    lambda_mult: float
    gap_add: float
    witness: HypWitness | None = None

    def to_dict(self):
        (b1, b2) = self.balls
        return {
            "balls": [{"center": b1.center, "radius": b1.radius},
                      {"center": b2.center, "radius": b2.radius}],
            "intersection": sorted(self.intersection),
            "inner": {"center": self.inner[0], "radius": self.inner[1]},
            "outer": {"center": self.outer[0], "radius": self.outer[1]},
            "lambda_mult": self.lambda_mult,
            "gap_add": self.gap_add,
            "witness": None if self.witness is None else self.witness.to_dict(),
        }


def lens_report(space: FiniteMetricSpace, b1: Ball, b2: Ball, with_witness: bool = False) -> LensReport:
    """Inner/outer balls and distortions of one lens; inclusions verified before returning."""
    D = space.dist
    mask = ball_mask(space, b1) & ball_mask(space, b2)
    if not mask.any():
        raise EmptyIntersection("the two balls do not meet",
                                balls=[[b1.center, b1.radius], [b2.center, b2.radius]])
    z, nu = best_inner_ball(space, mask, b1.tol)
    zp, R = best_outer_ball(space, mask)
    inner = D[z] <= nu + b1.tol
    outer = D[zp] <= R + b1.tol
    if np.any(inner & ~mask) or np.any(mask & ~outer):
        raise AssertionError("lens inclusions failed; this is a bug")
    lam, gap = _lambda_gap(nu, R)
    wit = None
    if with_witness:
        wit = hyp_distortion_witness(space, b1.center, b1.radius, b2.center, b2.radius, b1.tol)
    K = frozenset(int(i) for i in np.flatnonzero(mask))
    return LensReport((b1, b2), K, (z, nu), (zp, R), lam, gap, wit)


@dataclass
class DistortionProfile:
    pairs_scanned: int
    empty_skipped: int
    restricted_skipped: int
    distinct_lenses: int
    sup_lambda_mult: float
    sup_lambda_mult_finite: float
    sup_gap_add: float
    histogram: list
    worst_gap: LensReport | None
    worst_lambda: LensReport | None
    scale: float = 1.0
    exhaustive: bool = True
    seed: int = 0
    radius_grid: object = "auto"
    restrict_far: bool = True
    quantum: float = 0.0
    witness_stats: dict | None = None
    config: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "scale": self.scale,
            "exhaustive": self.exhaustive,
            "seed": self.seed,
            "radius_grid": self.radius_grid,
            "restrict_far": self.restrict_far,
            "pairs_scanned": self.pairs_scanned,
            "empty_skipped": self.empty_skipped,
            "restricted_skipped": self.restricted_skipped,
            "distinct_lenses": self.distinct_lenses,
            "sup_lambda_mult": self.sup_lambda_mult,
            "sup_lambda_mult_finite": self.sup_lambda_mult_finite,
            "sup_gap_add": self.sup_gap_add,
            "quantum": self.quantum,
            "histogram": self.histogram,
            "worst_gap": None if self.worst_gap is None else self.worst_gap.to_dict(),
            "worst_lambda": None if self.worst_lambda is None else self.worst_lambda.to_dict(),
            "witness_stats": self.witness_stats,
        }


def _radius_table(space, radius_grid, tau):
    D = space.dist
    n = space.n
    if radius_grid is None or radius_grid == "auto":
        radii = [np.unique(D[x]) for x in range(n)]
    else:
        g = np.unique(np.asarray(radius_grid, dtype=float))
        if g.size == 0 or np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ParameterOutOfRange("radius grid must be non-empty, finite and >= 0")
        radii = [g] * n
    sizes = np.array([len(r) for r in radii])
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    flat = np.concatenate(radii)
    centers = np.repeat(np.arange(n), sizes)
    masks = np.packbits(D[centers] <= flat[:, None] + tau, axis=1)
    return offsets, flat, masks


def _enumerate_items(space, offsets, flat, masks, restrict_far, tau):
    D = space.dist
    n = space.n
    xs, ys, ri, si, Ks = [], [], [], [], []
    empty = restricted = 0
    for x in range(n - 1):
        rx = flat[offsets[x]:offsets[x + 1]]
        Bx = masks[offsets[x]:offsets[x + 1]]
        for y in range(x + 1, n):
            ry = flat[offsets[y]:offsets[y + 1]]
            By = masks[offsets[y]:offsets[y + 1]]
            d = D[x, y]
            if restrict_far:
                ir = np.flatnonzero(rx < d - tau)
                js = np.flatnonzero(ry < d - tau)
                restricted += len(rx) * len(ry) - len(ir) * len(js)
            else:
                ir = np.arange(len(rx))
                js = np.arange(len(ry))
            if len(ir) == 0 or len(js) == 0:
                continue
            K = Bx[ir][:, None, :] & By[js][None, :, :]
            ne = K.any(axis=-1)
            empty += int(ne.size - ne.sum())
            a, b = np.nonzero(ne)
            if len(a) == 0:
                continue
            xs.append(np.full(len(a), x))
            ys.append(np.full(len(a), y))
            ri.append(ir[a])
            si.append(js[b])
            Ks.append(K[a, b])
    nb = masks.shape[1]
    if not xs:
        z = np.empty(0, dtype=np.int64)
        return z, z, z, z, np.empty((0, nb), np.uint8), empty, restricted
    return (np.concatenate(xs), np.concatenate(ys), np.concatenate(ri), np.concatenate(si),
            np.concatenate(Ks), empty, restricted)


def _sample_items(space, offsets, flat, masks, restrict_far, tau, budget, seed):
    from ._sampling import sample_combinations

    D = space.dist
    rng = np.random.default_rng(seed)
    pairs = sample_combinations(rng, space.n, 2, budget)
    x, y = pairs[:, 0], pairs[:, 1]
    sizes = np.diff(offsets)
    ri = (rng.random(budget) * sizes[x]).astype(np.int64)
    si = (rng.random(budget) * sizes[y]).astype(np.int64)
    r = flat[offsets[x] + ri]
    s = flat[offsets[y] + si]
    keep = np.ones(budget, dtype=bool)
    restricted = 0
    if restrict_far:
        d = D[x, y]
        keep = (r < d - tau) & (s < d - tau)
        restricted = int((~keep).sum())
    K = masks[offsets[x] + ri] & masks[offsets[y] + si]
    ne = K.any(axis=1)
    empty = int((keep & ~ne).sum())
    keep &= ne
    order = np.lexsort((si[keep], ri[keep], y[keep], x[keep]))
    sel = np.flatnonzero(keep)[order]
    return x[sel], y[sel], ri[sel], si[sel], K[sel], empty, restricted


def _inner_outer(D, packed, n, tau, threads):
    def work(lo, hi):
        m = np.unpackbits(packed[lo:hi], axis=1, count=n).astype(bool)
        k = hi - lo
        z_in, z_out = np.empty(k, np.int64), np.empty(k, np.int64)
        nu, rad = np.empty(k), np.empty(k)
        _kernels.inner_outer_kernel(D, m, tau, z_in, nu, z_out, rad)
        return z_in, nu, z_out, rad

    parts = run_chunked(work, len(packed), chunk=2048, threads=threads)
    if not parts:
        e = np.empty(0)
        return e.astype(np.int64), e, e.astype(np.int64), e
    return tuple(np.concatenate(p) for p in zip(*parts))


def _witness_stats(space, xs, ys, r, s, tau, threads):
    D = np.ascontiguousarray(space.dist)
    P, T, C = space.paths

    def work(lo, hi):
        k = hi - lo
        z, nu = np.empty(k, np.int64), np.empty(k)
        inner, outer = np.empty(k), np.empty(k)
        _kernels.witness_kernel(D, P, T, C, xs[lo:hi], ys[lo:hi], r[lo:hi], s[lo:hi], tau,
                                z, nu, inner, outer)
        return inner, outer

    parts = run_chunked(work, len(xs), chunk=65536, threads=threads)
    if not parts:
        return {"checked": 0, "sup_inner_excess": 0.0, "sup_outer_delta": 0.0,
                "inner_failures": 0, "worst_inner": None, "worst_outer": None}
    inner = np.concatenate([p[0] for p in parts])
    outer = np.concatenate([p[1] for p in parts])
    qi, qo = int(np.argmax(inner)), int(np.argmax(outer))

    def item(q):
        return [int(xs[q]), float(r[q]), int(ys[q]), float(s[q])]

    return {
        "checked": len(xs),
        "sup_inner_excess": float(inner[qi]),
        "sup_outer_delta": float(outer[qo]),
        "inner_failures": int((inner > tau).sum()),
        "worst_inner": item(qi),
        "worst_outer": item(qo),
    }


def diamond_scan(space: FiniteMetricSpace, radius_grid="auto", pair_budget: int = DEFAULT_PAIR_BUDGET,
                 seed: int = 0, restrict_far: bool = True, with_witness: bool = False,
                 tau: float = BALL_TOL, threads=None) -> DistortionProfile:
    """Distortion of every lens ``B(x, r) & B(y, s)``, ``x < y``.

    ``radius_grid="auto"`` uses, for each centre, its realised distances
    (the same family of balls as the global set of realised distances). If
    the number of candidate ball pairs exceeds ``pair_budget`` a seeded
    uniform sample of that many candidates is scanned instead. With
    ``restrict_far`` only pairs with ``max(r, s) < d(x, y)`` are kept.
    """
    if pair_budget < 1:
        raise ParameterOutOfRange("pair_budget must be >= 1", pair_budget=pair_budget)
    D = np.ascontiguousarray(space.dist)
    n = space.n
    offsets, flat, masks = _radius_table(space, radius_grid, tau)
    sizes = np.diff(offsets)
    total = (int(sizes.sum()) ** 2 - int((sizes ** 2).sum())) // 2
    exhaustive = total <= pair_budget
    if exhaustive:
        xs, ys, ri, si, K, empty, restricted = _enumerate_items(space, offsets, flat, masks,
                                                               restrict_far, tau)
    else:
        xs, ys, ri, si, K, empty, restricted = _sample_items(space, offsets, flat, masks,
                                                            restrict_far, tau, pair_budget, seed)
    grid_echo = "auto" if (radius_grid is None or radius_grid == "auto") else \
        [float(v) for v in np.unique(np.asarray(radius_grid, float))]
    common = dict(scale=1.0, exhaustive=exhaustive, seed=seed, radius_grid=grid_echo,
                  restrict_far=restrict_far, quantum=space.quantum)
    if len(xs) == 0:
        return DistortionProfile(0, empty, restricted, 0, 1.0, 1.0, 0.0, [], None, None,
                                 witness_stats=None, **common)

    nb = K.shape[1]
    keys = np.ascontiguousarray(K).view(np.dtype((np.void, nb))).ravel()
    uniq, first, inv = np.unique(keys, return_index=True, return_inverse=True)
    inv = inv.ravel()
    z_in, nu, z_out, rad = _inner_outer(D, K[first], n, tau, threads)

    lam = np.where(rad == 0.0, 1.0, np.where(nu > 0.0, rad / np.where(nu > 0, nu, 1.0), np.inf))
    gap = rad - nu
    item_lam, item_gap = lam[inv], gap[inv]
    qg = int(np.argmax(item_gap))
    ql = int(np.argmax(item_lam))
    finite = np.isfinite(item_lam)
    sup_fin = float(item_lam[finite].max()) if finite.any() else 1.0

    counts = np.bincount(inv, minlength=len(uniq))
    pairs, hinv = np.unique(np.stack([nu, rad], axis=1), axis=0, return_inverse=True)
    hcount = np.bincount(hinv.ravel(), weights=counts).astype(np.int64)
    histogram = [[float(a), float(b), int(c)] for (a, b), c in zip(pairs, hcount)]

    r_all = flat[offsets[xs] + ri]
    s_all = flat[offsets[ys] + si]

    def report(q):
        return lens_report(space, Ball(int(xs[q]), float(r_all[q]), tau),
                           Ball(int(ys[q]), float(s_all[q]), tau), with_witness=True)

    wstats = None
    if with_witness:
        wstats = _witness_stats(space, xs.astype(np.int64), ys.astype(np.int64),
                                r_all, s_all, tau, threads)
    return DistortionProfile(
        pairs_scanned=len(xs), empty_skipped=empty, restricted_skipped=restricted,
        distinct_lenses=len(uniq), sup_lambda_mult=float(item_lam[ql]),
        sup_lambda_mult_finite=sup_fin, sup_gap_add=float(item_gap[qg]),
        histogram=histogram, worst_gap=report(qg), worst_lambda=report(ql),
        witness_stats=wstats, **common)


@dataclass
class LensBoundCheck:
    params: dict
    members: list
    diam: float
    bound: float
    allowance: float
    passed: bool
    empty: bool = False

    def to_dict(self):
        return {**self.params, "members": self.members, "diam": self.diam, "bound": self.bound,
                "allowance": self.allowance, "pass": self.passed, "empty": self.empty}


def lens_diameter_check(space: FiniteMetricSpace, x: int, y: int, t: float, h: float,
                        lam: float = 1.0, tau: float = BALL_TOL) -> LensBoundCheck:
    """Diameter of ``B(x, t r + h) & B(y, (1-t) r + h)``, ``r = d(x, y)``, against ``4 lam h``.

    Passes when ``diam <= 4 lam h + quantum``. A lens that is empty only
    because of discreteness passes with ``empty=True``.
    """
    space.check_index(x, y)
    r = float(space.dist[x, y])
    if x == y:
        raise ParameterOutOfRange("x and y must be distinct", x=int(x), y=int(y))
    if not 0.0 < t < 1.0:
        raise ParameterOutOfRange(f"t={t} outside (0, 1)", t=t)
    if not 0.0 <= h < max(t, 1.0 - t) * r:
        raise ParameterOutOfRange(f"h={h} outside [0, max(t,1-t) d(x,y))", h=h)
    A = ball_mask(space, Ball(x, t * r + h, tau)) & ball_mask(space, Ball(y, (1 - t) * r + h, tau))
    members = [int(i) for i in np.flatnonzero(A)]
    diam = set_diameter(space, members) if members else 0.0
    bound = 4.0 * lam * h
    allowance = space.quantum
    params = {"x": int(x), "y": int(y), "t": float(t), "h": float(h), "lambda": float(lam)}
    return LensBoundCheck(params, members, diam, bound, allowance,
                          diam <= bound + allowance, not members)


def find_lens_violation(space: FiniteMetricSpace, lam: float = 1.0,
                        t_values=(0.25, 0.5, 0.75), h_values=None) -> LensBoundCheck | None:
    """First ``(x, y, t, h)`` in lexicographic order whose lens breaks ``diam <= 4 lam h``."""
    if h_values is None:
        q = space.quantum
        h_values = (0.0, 0.5 * q, q, 2.0 * q)
    D = space.dist
    for x in range(space.n):
        for y in range(x + 1, space.n):
            for t in t_values:
                for h in h_values:
                    if not h < max(t, 1 - t) * D[x, y]:
                        continue
                    chk = lens_diameter_check(space, x, y, t, h, lam)
                    if not chk.passed:
                        return chk
    return None


def alt_hypothesis_check(space: FiniteMetricSpace, x: int, r: float, x2: int, r2: float,
                         lam: float = 1.0, tau: float = BALL_TOL) -> LensBoundCheck:
    """``diam(B(x,r) & B(x2,r2)) <= 2 lam (r + r2 - d(x, x2))`` for far-apart centres."""
    space.check_index(x, x2)
    d = float(space.dist[x, x2])
    if not max(r, r2) < d:
        raise ParameterOutOfRange("need max(r, r2) < d(x, x2)", r=r, r2=r2, d=d)
    K = ball_mask(space, Ball(x, r, tau)) & ball_mask(space, Ball(x2, r2, tau))
    members = [int(i) for i in np.flatnonzero(K)]
    if not members:
        raise EmptyIntersection("the two balls do not meet", x=int(x), r=r, x2=int(x2), r2=r2)
    diam = set_diameter(space, members)
    bound = 2.0 * lam * (r + r2 - d)
    params = {"x": int(x), "r": float(r), "x2": int(x2), "r2": float(r2), "lambda": float(lam)}
    return LensBoundCheck(params, members, diam, bound, space.quantum,
                          diam <= bound + space.quantum)


def rescale_sweep(space: FiniteMetricSpace, scales, radius_grid="auto", **scan_kwargs) -> list:
    """``diamond_scan`` of ``(X, d / sigma)`` for each ``sigma``; returns ``[(sigma, profile)]``."""
    scales = [float(s) for s in scales]
    if not scales or any(s <= 0 for s in scales):
        raise ParameterOutOfRange("scales must be positive", scales=scales)
    if any(b < a for a, b in zip(scales, scales[1:])):
        raise ParameterOutOfRange("scales must be ascending", scales=scales)
    out = []
    for sigma in scales:
        grid = radius_grid
        if not (grid is None or grid == "auto"):
            grid = np.asarray(grid, float) / sigma
        prof = diamond_scan(space.rescaled(sigma), radius_grid=grid, **scan_kwargs)
        prof.scale = sigma
        out.append((sigma, prof))
    return out
