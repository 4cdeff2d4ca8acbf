"""Loops, scalar fields and maps from planar grids into finite metric spaces.

The pieces here are discrete stand-ins for Lipschitz calculus: a loop is a
closed sequence of points with parameter times in ``[t0, tN]`` (the circle),
line integrals use the trapezoid rule, and maps are sampled on a square
lattice clipped to a domain mask.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DomainTooSmall, LipschitzViolation, LoopNotClosed, ParameterOutOfRange
from .space import (FiniteMetricSpace, NormedSampleSpace, eval_geodesic, geodesic)

MASK_EPS = 1e-12


# ---------------------------------------------------------------- loops

@dataclass(frozen=True, eq=False)
class SampledLoop:
    """Closed loop: ``points[0] == points[-1]``; ``times`` strictly increasing.

    With ``times=None`` the samples are spread uniformly over ``[0, 1]``.
    """

    points: tuple
    times: np.ndarray | None = None

    def __post_init__(self):
        pts = tuple(int(p) for p in self.points)
        if len(pts) < 2:
            raise LoopNotClosed("a loop needs at least two samples", length=len(pts))
        if pts[0] != pts[-1]:
            raise LoopNotClosed(f"loop starts at {pts[0]} but ends at {pts[-1]}",
                                start=pts[0], end=pts[-1])
        t = np.linspace(0.0, 1.0, len(pts)) if self.times is None else \
            np.asarray(self.times, dtype=float)
        if t.shape != (len(pts),):
            raise ParameterOutOfRange("times and points differ in length",
                                      times=int(t.size), points=len(pts))
        if not np.all(np.isfinite(t)) or np.any(np.diff(t) <= 0):
            raise ParameterOutOfRange("loop times must be finite and strictly increasing")
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "times", t)

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return (isinstance(other, SampledLoop) and self.points == other.points
                and np.array_equal(self.times, other.times))

    @property
    def angles(self) -> np.ndarray:
        """Circle angle of each sample, in ``[0, 2 pi]``."""
        t0, tN = self.times[0], self.times[-1]
        return 2.0 * math.pi * (self.times - t0) / (tN - t0)

    def reversed(self) -> "SampledLoop":
        t = self.times
        s = t[0] + t[-1] - t[::-1]
        s[0], s[-1] = t[0], t[-1]
        return SampledLoop(self.points[::-1], s)

    def concat(self, other: "SampledLoop") -> "SampledLoop":
        """Run ``self`` then ``other``; both must start at the same point."""
        if self.points[0] != other.points[0]:
            raise LoopNotClosed("loops do not share a basepoint",
                                a=self.points[0], b=other.points[0])
        a = (self.times - self.times[0]) / (self.times[-1] - self.times[0])
        b = (other.times - other.times[0]) / (other.times[-1] - other.times[0])
        return SampledLoop(self.points + other.points[1:], np.concatenate([a / 2, 0.5 + b[1:] / 2]))

    def nearest_sample(self, theta) -> np.ndarray:
        """Index of the sample at the circularly nearest angle; ties to the smaller index."""
        ang = self.angles[:-1]
        th = np.mod(np.asarray(theta, dtype=float), 2 * math.pi)
        gap = np.abs(th[..., None] - ang)
        gap = np.minimum(gap, 2 * math.pi - gap)
        return np.argmin(gap, axis=-1)

    def lip(self, space: FiniteMetricSpace) -> float:
        """Lipschitz constant on the unit circle with the chord metric."""
        pts = np.array(self.points[:-1])
        th = self.angles[:-1]
        chord = 2.0 * np.abs(np.sin((th[:, None] - th[None, :]) / 2.0))
        d = space.dist[np.ix_(pts, pts)]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = np.where(chord > 0, d / chord, 0.0)
        return float(q.max()) if q.size else 0.0


def loop_through(space: FiniteMetricSpace, waypoints) -> SampledLoop:
    """Closed loop following canonical geodesics ``w0 -> w1 -> ... -> w0``.

    Times are proportional to arc length, so the loop has constant speed.
    """
    w = [int(p) for p in waypoints]
    if not w:
        raise ParameterOutOfRange("need at least one waypoint")
    space.check_index(*w)
    w.append(w[0])
    pts = [w[0]]
    arc = [0.0]
    for a, b in zip(w, w[1:]):
        if a == b:
            continue
        g = geodesic(space, a, b)
        pts.extend(g.points[1:])
        arc.extend(arc[-1] + g.arclen[1:])
    if len(pts) == 1:
        return SampledLoop((w[0], w[0]))
    arc = np.asarray(arc)
    return SampledLoop(tuple(pts), arc / arc[-1])


# ---------------------------------------------------------------- scalar fields

@dataclass(frozen=True, eq=False)
class ScalarField:
    values: np.ndarray
    lip: float

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "lip", float(self.lip))

    def __call__(self, p):
        return self.values[p]

    def validate(self, space: FiniteMetricSpace, tol: float = 1e-9, block: int = 1024) -> "ScalarField":
        """Check ``|f(p) - f(q)| <= lip d(p, q)`` on every pair; returns ``self``."""
        n = space.n
        if self.values.shape != (n,):
            raise ParameterOutOfRange("field has the wrong number of values",
                                      values=int(self.values.size), points=n)
        if not np.all(np.isfinite(self.values)):
            raise LipschitzViolation("field has non-finite values")
        v = self.values
        allq = np.arange(n)
        for lo in range(0, n, block):
            rows = np.arange(lo, min(lo + block, n))
            d = space.pair_dist(rows[:, None], allq[None, :])
            excess = np.abs(v[rows, None] - v[None, :]) - self.lip * d
            if excess.max() > tol * max(1.0, self.lip):
                i, j = np.unravel_index(int(np.argmax(excess)), excess.shape)
                raise LipschitzViolation(
                    f"|f({rows[i]}) - f({j})| exceeds {self.lip:g} * d by {excess[i, j]:.3g}",
                    p=int(rows[i]), q=int(j), excess=float(excess[i, j]))
        return self


def bump_field(space: FiniteMetricSpace, S, eps: float) -> ScalarField:
    """``max(0, 1 - dist(p, S) / eps)``; Lipschitz with constant ``1/eps``."""
    S = sorted({int(p) for p in S})
    if not S:
        raise ParameterOutOfRange("bump support must be non-empty")
    if not eps > 0:
        raise ParameterOutOfRange("eps must be positive", eps=eps)
    space.check_index(*S)
    dS = space.pair_dist(np.arange(space.n)[:, None], np.array(S)[None, :]).min(axis=1)
    return ScalarField(np.maximum(0.0, 1.0 - dS / eps), 1.0 / eps)


def distance_field(space: FiniteMetricSpace, x0: int) -> ScalarField:
    """``dist(p, x0)``; 1-Lipschitz."""
    space.check_index(x0)
    return ScalarField(space.pair_dist(np.arange(space.n), x0), 1.0)


def coordinate_field(space: NormedSampleSpace, axis: int) -> ScalarField:
    """One coordinate of a planar sample; 1-Lipschitz for the l1, l2 and linf norms."""
    return ScalarField(space.coords[:, axis], 1.0)


@dataclass
class LoopIntegral:
    value: float
    segments: np.ndarray

    def to_dict(self):
        return {"value": self.value, "segments": [float(s) for s in self.segments]}


def loop_integral(loop: SampledLoop, f: ScalarField, pi: ScalarField) -> LoopIntegral:
    """Trapezoid Stieltjes sum of ``f d(pi)`` around ``loop``.

    Each segment contributes ``(f_i + f_{i+1})/2 * (pi_{i+1} - pi_i)``. The
    total is an exactly rounded sum, so a segment and its reversal cancel to
    exactly zero.
    """
    if loop.points[0] != loop.points[-1]:
        raise LoopNotClosed("loop is not closed")
    p = np.array(loop.points)
    F, P = f.values[p], pi.values[p]
    seg = 0.5 * (F[:-1] + F[1:]) * (P[1:] - P[:-1])
    return LoopIntegral(math.fsum(seg.tolist()), seg)


# ---------------------------------------------------------------- grids and maps

@dataclass(frozen=True, eq=False)
class Grid:
    """Square lattice ``shape`` with spacing ``h``, centred at the origin.

    Node ``(i, j)`` sits at ``origin + h * (i, j)``; ``mask`` marks the domain.
    """

    shape: tuple
    spacing: float
    mask: np.ndarray

    def __post_init__(self):
        m = np.array(self.mask, dtype=bool)
        if m.shape != tuple(self.shape):
            raise ParameterOutOfRange("mask shape differs from grid shape")
        m.setflags(write=False)
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))
        object.__setattr__(self, "mask", m)
        object.__setattr__(self, "spacing", float(self.spacing))

    @property
    def h(self) -> float:
        return self.spacing

    @property
    def origin(self) -> np.ndarray:
        return -0.5 * self.spacing * (np.array(self.shape) - 1)

    def coords(self) -> np.ndarray:
        """Node positions, shape ``shape + (2,)``."""
        I, J = np.meshgrid(np.arange(self.shape[0]), np.arange(self.shape[1]), indexing="ij")
        return self.origin + self.spacing * np.stack([I, J], axis=-1)

    def to_dict(self):
        return {"shape": list(self.shape), "spacing": self.spacing,
                "mask": self.mask.astype(int).tolist()}


def disc_grid(n: int) -> Grid:
    """``n x n`` lattice over ``[-1, 1]^2`` clipped to the closed unit disc."""
    if n < 3:
        raise DomainTooSmall("disc grid needs n >= 3", n=n)
    h = 2.0 / (n - 1)
    g = Grid((n, n), h, np.ones((n, n), bool))
    r = np.hypot(*np.moveaxis(g.coords(), -1, 0))
    return Grid((n, n), h, r <= 1.0 + MASK_EPS)


def boundary_cycle(grid: Grid) -> np.ndarray:
    """Counter-clockwise boundary of the union of full cells, as ``(k, 2)`` node indices.

    A cell is full when its four corners are in the mask. The cycle starts at
    the boundary node with the smallest polar angle in ``[0, 2 pi)``.
    """
    m = grid.mask
    cells = m[:-1, :-1] & m[1:, :-1] & m[1:, 1:] & m[:-1, 1:]
    if not cells.any():
        raise DomainTooSmall("domain contains no full grid cell")
    edges = set()
    for i, j in zip(*np.nonzero(cells)):
        c = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
        for a, b in zip(c, c[1:] + c[:1]):
            if (b, a) in edges:
                edges.remove((b, a))
            else:
                edges.add((a, b))
    succ = {}
    for a, b in edges:
        if a in succ:
            raise DomainTooSmall("boundary of the cell union is not a simple cycle")
        succ[a] = b
    xy = grid.coords()
    nodes = sorted(succ)
    ang = [(math.atan2(xy[a][1], xy[a][0]) % (2 * math.pi), -math.hypot(*xy[a]), a) for a in nodes]
    start = min(ang)[2]
    cyc = [start]
    while True:
        nxt = succ[cyc[-1]]
        if nxt == start:
            break
        cyc.append(nxt)
    if len(cyc) != len(succ):
        raise DomainTooSmall("boundary of the cell union has several components")
    return np.array([(int(a), int(b)) for a, b in cyc])


@dataclass(frozen=True, eq=False)
class SampledMap:
    """Grid nodes mapped to point indices of ``space`` (``-1`` off the mask)."""

    space: FiniteMetricSpace
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=np.int64)
        if v.shape != self.grid.shape:
            raise ParameterOutOfRange("values shape differs from grid shape")
        if np.any(v[self.grid.mask] < 0) or np.any(v[self.grid.mask] >= self.space.n):
            raise ParameterOutOfRange("map values must be point indices on the mask")
        v = np.where(self.grid.mask, v, -1)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @cached_property
    def lip_est(self) -> float:
        """Max of ``dist(phi(u), phi(v)) / h`` over horizontally or vertically adjacent nodes."""
        m, v, sp = self.grid.mask, self.values, self.space
        best = 0.0
        for a, b, ok in ((v[:-1, :], v[1:, :], m[:-1, :] & m[1:, :]),
                         (v[:, :-1], v[:, 1:], m[:, :-1] & m[:, 1:])):
            if ok.any():
                best = max(best, float(sp.pair_dist(a[ok], b[ok]).max()))
        return best / self.grid.h

    def boundary_loop(self) -> SampledLoop:
        cyc = boundary_cycle(self.grid)
        pts = self.values[cyc[:, 0], cyc[:, 1]]
        return SampledLoop(tuple(pts.tolist()) + (int(pts[0]),))


def identity_disc_map(grid_n: int, norm: str = "l2") -> SampledMap:
    """Disc grid mapped onto its own nodes, viewed as a normed-plane sample."""
    g = disc_grid(grid_n)
    xy = g.coords()[g.mask]
    vals = np.full(g.shape, -1, dtype=np.int64)
    vals[g.mask] = np.arange(len(xy))
    return SampledMap(NormedSampleSpace(xy, norm), g, vals)


def cone_extension(space: FiniteMetricSpace, loop: SampledLoop, x0: int, grid_n: int) -> SampledMap:
    """Fill ``loop`` with geodesics from ``x0`` over the disc grid.

    A node at polar ``(r, theta)`` maps to ``x0`` when ``r <= 1/2`` and
    otherwise to the point at arc length ``2 (r - 1/2) d(x0, g)`` along the
    canonical geodesic ``x0 -> g``, where ``g`` is the loop sample at the
    nearest angle. Nodes on the boundary cycle are treated as ``r = 1``, so
    the boundary carries loop samples.
    """
    if grid_n < 8:
        raise DomainTooSmall("cone extension needs grid_n >= 8", grid_n=grid_n)
    space.check_index(x0, *loop.points)
    g = disc_grid(grid_n)
    xy = g.coords()
    r = np.minimum(np.hypot(xy[..., 0], xy[..., 1]), 1.0)
    theta = np.arctan2(xy[..., 1], xy[..., 0])
    cyc = boundary_cycle(g)
    r[cyc[:, 0], cyc[:, 1]] = 1.0
    target = np.array(loop.points)[loop.nearest_sample(theta)]
    vals = np.full(g.shape, -1, dtype=np.int64)
    geos = {}
    D = space.dist
    for i, j in zip(*np.nonzero(g.mask)):
        if r[i, j] <= 0.5:
            vals[i, j] = x0
            continue
        y = int(target[i, j])
        geo = geos.get(y)
        if geo is None:
            geo = geos[y] = geodesic(space, x0, y)
        vals[i, j] = eval_geodesic(geo, min(2.0 * (r[i, j] - 0.5), 1.0) * D[x0, y])
    return SampledMap(space, g, vals)


# ---------------------------------------------------------------- bicombing

def bicombing_check(space: FiniteMetricSpace, x: int, y: int, y2: int, lam: float = 1.0) -> dict:
    """Largest gap between the geodesics ``x -> y`` and ``x -> y2`` at equal relative time.

    Both geodesics are run on ``[0, 1]``; the comparison uses every sample
    time of either one.
    """
    space.check_index(x, y, y2)
    c, c2 = geodesic(space, x, y), geodesic(space, x, y2)
    s = []
    for geo in (c, c2):
        if geo.length > 0:
            s.append(geo.arclen / geo.length)
    s = np.unique(np.concatenate(s)) if s else np.array([0.0])
    D = space.dist
    a = [eval_geodesic(c, min(t * c.length, c.length)) for t in s]
    b = [eval_geodesic(c2, min(t * c2.length, c2.length)) for t in s]
    dev = D[a, b]
    k = int(np.argmax(dev))
    dyy = float(D[y, y2])
    q = space.quantum
    max_dev = float(dev[k])
    return {"x": int(x), "y": int(y), "y2": int(y2), "lambda": float(lam), "max_dev": max_dev,
            "at_t": float(s[k]), "bound": 4.0 * lam * dyy, "dist_yy": dyy, "allowance": q,
            "pass": max_dev <= 4.0 * lam * dyy + q, "strong_pass": max_dev <= dyy + q}


# ---------------------------------------------------------------- metric derivative

@dataclass
class MdField:
    """Difference quotients ``d(phi(z + w), phi(z)) / |w|`` at interior nodes.

    ``w`` is ``r v`` snapped to the lattice for each direction ``v`` and each
    ladder scale ``r`` (in grid steps, coarse to fine). The estimate is the
    finest scale; a node is converged when consecutive scales agree within
    ``tol`` in every direction.
    """

    nodes: np.ndarray  # (m, 2) grid indices
    directions: np.ndarray  # (D, 2) unit vectors
    scales: tuple  # grid steps, descending
    quotients: np.ndarray  # (m, S, D)
    tol: float
    lip_est: float
    lip_stencil: float
    h: float

    @property
    def md(self) -> np.ndarray:
        return self.quotients[:, -1, :]

    @property
    def agreement(self) -> np.ndarray:
        if self.quotients.shape[1] < 2:
            return np.zeros(len(self.nodes))
        return np.abs(np.diff(self.quotients, axis=1)).max(axis=(1, 2))

    @property
    def converged(self) -> np.ndarray:
        return self.agreement <= self.tol

    @property
    def min_ratio(self) -> np.ndarray:
        return self.md.min(axis=1)

    @property
    def max_ratio(self) -> np.ndarray:
        return self.md.max(axis=1)

    def summary(self) -> dict:
        md = self.md
        conv = self.converged
        return {"nodes": int(len(self.nodes)), "converged": int(conv.sum()),
                "directions": int(len(self.directions)), "scales": [int(s) for s in self.scales],
                "h": self.h, "tol": self.tol, "lip_est": self.lip_est,
                "lip_stencil": self.lip_stencil,
                "md_min": float(md.min()), "md_max": float(md.max())}


def md_field(smap: SampledMap, directions: int = 16, scales=(4, 2), tol: float | None = None,
             threads=None) -> MdField:
    """Metric-derivative estimates on every node whose whole stencil is in the domain.

    ``tol`` defaults to ``2 h max(1, lip_est)``.
    """
    if directions < 4:
        raise ParameterOutOfRange("need at least 4 directions", directions=directions)
    scales = tuple(sorted({int(s) for s in scales}, reverse=True))
    g = smap.grid
    if not scales or scales[-1] < 1 or scales[0] >= max(g.shape):
        raise ParameterOutOfRange("scales must be grid steps within the grid", scales=list(scales))
    ang = 2.0 * math.pi * np.arange(directions) / directions
    V = np.column_stack([np.cos(ang), np.sin(ang)])
    W = np.rint(np.asarray(scales, float)[:, None, None] * V[None, :, :]).astype(np.int64)  # (S, D, 2)
    if np.any(np.all(W == 0, axis=-1)):
        raise ParameterOutOfRange("a scale snaps some direction to zero displacement")
    nodes = np.argwhere(g.mask)
    ok = np.ones(len(nodes), dtype=bool)
    for w in W.reshape(-1, 2):
        t = nodes + w
        inside = (t[:, 0] >= 0) & (t[:, 0] < g.shape[0]) & (t[:, 1] >= 0) & (t[:, 1] < g.shape[1])
        tt = np.where(inside[:, None], t, 0)
        ok &= inside & g.mask[tt[:, 0], tt[:, 1]]
    nodes = nodes[ok]
    if len(nodes) == 0:
        raise DomainTooSmall("no node has its whole stencil inside the domain")
    vals = smap.values
    base = vals[nodes[:, 0], nodes[:, 1]]
    S, Dn = W.shape[:2]
    Q = np.empty((len(nodes), S, Dn))
    wl = g.h * np.hypot(W[..., 0], W[..., 1])
    for s in range(S):
        for k in range(Dn):
            t = nodes + W[s, k]
            Q[:, s, k] = smap.space.pair_dist(vals[t[:, 0], t[:, 1]], base) / wl[s, k]
    lip = smap.lip_est
    if tol is None:
        tol = 2.0 * g.h * max(1.0, lip)
    return MdField(nodes, V, scales, Q, float(tol), lip, float(Q.max()), g.h)


def seminorm_check(field: MdField) -> dict:
    """Per-node residuals of the seminorm laws at converged nodes.

    homogeneity: spread of the quotients across the ladder;
    symmetry: ``|md(v) - md(-v)|``;
    direction-Lipschitz: ``(|md(v) - md(v')| - L |v - v'|)+`` with ``L`` the
    stencil Lipschitz estimate;
    subadditivity: ``(|v + w| md(u) - md(v) - md(w))+`` for ``u`` the bisector
    of ``v`` and ``w``.
    """
    md = field.md
    Dn = md.shape[1]
    conv = field.converged
    homog = field.agreement
    half = Dn // 2
    sym = np.abs(md - np.roll(md, -half, axis=1)).max(axis=1) if Dn % 2 == 0 else \
        np.zeros(len(md))
    V = field.directions
    dv = np.linalg.norm(V[:, None, :] - V[None, :, :], axis=-1)
    dl = np.zeros(len(md))
    for k in range(Dn):
        ex = np.abs(md[:, k:k + 1] - md) - field.lip_stencil * dv[k][None, :]
        dl = np.maximum(dl, ex.max(axis=1))
    dl = np.maximum(dl, 0.0)
    sub = np.zeros(len(md))
    for i in range(Dn):
        for step in range(2, half, 2):
            j = (i + step) % Dn
            u = (i + step // 2) % Dn
            scale = 2.0 * math.cos(math.pi * step / Dn)
            sub = np.maximum(sub, scale * md[:, u] - md[:, i] - md[:, j])
    sub = np.maximum(sub, 0.0)
    worst = np.maximum.reduce([homog, sym, dl, sub])
    ok = worst <= field.tol
    nconv = int(conv.sum())
    return {
        "converged_nodes": nconv,
        "tol": field.tol,
        "homogeneity_max": float(homog[conv].max()) if nconv else 0.0,
        "symmetry_max": float(sym[conv].max()) if nconv else 0.0,
        "direction_lipschitz_max": float(dl[conv].max()) if nconv else 0.0,
        "subadditivity_max": float(sub[conv].max()) if nconv else 0.0,
        "fraction_within_tol": float(ok[conv].mean()) if nconv else 1.0,
        "per_node": {"homogeneity": homog, "symmetry": sym, "direction_lipschitz": dl,
                     "subadditivity": sub, "within_tol": ok},
    }


def degeneracy_field(field: MdField, tau: float = 0.1) -> dict:
    """Nodes where ``min_v md(v) < tau max_v md(v)``, or ``md`` vanishes."""
    if not 0.0 < tau < 1.0:
        raise ParameterOutOfRange("tau must lie in (0, 1)", tau=tau)
    lo, hi = field.min_ratio, field.max_ratio
    deg = (hi == 0.0) | (lo < tau * hi)
    conv = field.converged
    n = int(conv.sum())
    frac = float(deg[conv].mean()) if n else float("nan")
    return {"tau": tau, "fraction_degenerate": frac, "converged_nodes": n,
            "fraction_all_nodes": float(deg.mean()), "mask": deg}


# ---------------------------------------------------------------- Stokes

def stokes_check(smap: SampledMap, f: ScalarField, pi: ScalarField) -> dict:
    """Boundary trapezoid integral of ``f d(pi)`` against the cell-wise Jacobian sum.

    The area side uses, per full cell, the determinant of the cell-centred
    difference Jacobian of ``(f o phi, pi o phi)`` times ``h^2``.
    """
    g = smap.grid
    cyc = boundary_cycle(g)
    m = g.mask
    cells = m[:-1, :-1] & m[1:, :-1] & m[1:, 1:] & m[:-1, 1:]
    v = np.where(m, smap.values, 0)
    F = np.where(m, f.values[v], 0.0)
    P = np.where(m, pi.values[v], 0.0)
    h = g.h

    def grads(A):
        ax = 0.5 * ((A[1:, :-1] - A[:-1, :-1]) + (A[1:, 1:] - A[:-1, 1:])) / h
        ay = 0.5 * ((A[:-1, 1:] - A[:-1, :-1]) + (A[1:, 1:] - A[1:, :-1])) / h
        return ax, ay

    Fx, Fy = grads(F)
    Px, Py = grads(P)
    det = (Fx * Py - Fy * Px)[cells]
    area = math.fsum((det * h * h).tolist())
    loop = smap.boundary_loop()
    bnd = loop_integral(loop, f, pi).value
    return {"boundary_integral": bnd, "area_integral": area, "residual": abs(bnd - area),
            "h": h, "cells": int(cells.sum()), "boundary_nodes": int(len(cyc))}
