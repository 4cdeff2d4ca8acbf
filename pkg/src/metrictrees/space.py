"""Finite metric spaces, discrete geodesics, balls and diameters.

A :class:`FiniteMetricSpace` wraps a validated, symmetric distance matrix.
Geodesics live on the *metric skeleton*: the graph joining ``i`` and ``j``
whenever no third point lies between them (``d(i,k) + d(k,j) = d(i,j)``).
For unit-weight graphs and for weighted trees the skeleton is exactly the
original edge set, so canonical geodesics are ordinary shortest paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import (
    AsymmetricInput,
    CoincidentPoints,
    DisconnectedGraph,
    EmptySetDiameter,
    GeodesicEnumerationCapExceeded,
    InvalidGraph,
    NegativeEntry,
    NonFiniteEntry,
    NonzeroDiagonal,
    NotSquare,
    ParameterOutOfRange,
    TriangleViolation,
)

DEFAULT_TOL = 1e-9
BALL_TOL = 1e-9
# relative tie window used when snapping a parameter to the nearest vertex time
TIE_EPS = 1e-12

__all__ = [
    "DEFAULT_TOL",
    "BALL_TOL",
    "Ball",
    "DiscreteGeodesic",
    "FiniteMetricSpace",
    "GraphSpec",
    "NormedSampleSpace",
    "all_geodesics",
    "ball_members",
    "eval_geodesic",
    "geodesic",
    "geodesicity_defect",
    "metric_from_graph",
    "midpoint_defects",
    "set_diameter",
    "validate_metric",
]


def _metric_violations(D: np.ndarray, tol: float) -> list[dict]:
    """Return one record per violated axiom, each carrying the worst offender."""
    n = D.shape[0]
    out = []
    if not np.all(np.isfinite(D)):
        i, j = map(int, np.argwhere(~np.isfinite(D))[0])
        out.append({"axiom": "finite", "pair": [i, j]})
        return out  # the remaining checks are meaningless with inf/nan

    neg = D < -tol
    if neg.any():
        flat = int(np.argmin(D))
        out.append({"axiom": "non-negative", "pair": list(divmod(flat, n)),
                    "value": float(D.flat[flat])})

    diag = np.abs(np.diag(D))
    if np.any(diag > tol):
        i = int(np.argmax(diag))
        out.append({"axiom": "zero-diagonal", "index": i, "value": float(D[i, i])})

    asym = np.triu(np.abs(D - D.T), 1)
    if np.any(asym > tol):
        flat = int(np.argmax(asym))
        i, j = divmod(flat, n)
        out.append({"axiom": "symmetry", "pair": [i, j],
                    "values": [float(D[i, j]), float(D[j, i])]})

    off = D + np.eye(n) * (tol + 1.0)
    if n > 1 and np.any(off <= tol):
        i, j = map(int, np.argwhere(np.triu(off <= tol, 1))[0])
        out.append({"axiom": "separation", "pair": [i, j], "value": float(D[i, j])})

    S = 0.5 * (D + D.T)
    worst = None
    count = 0
    upper = np.triu(np.ones((n, n), dtype=bool), 1)
    for j in range(n):
        slack = S - (S[:, j, None] + S[None, j, :])
        bad = (slack > tol) & upper
        if not bad.any():
            continue
        count += int(bad.sum())
        masked = np.where(bad, slack, -np.inf)
        flat = int(np.argmax(masked))
        cand = (-float(masked.flat[flat]), *divmod(flat, n), j)
        if worst is None or cand < worst:
            worst = cand
    if worst is not None:
        s, i, k, j = worst
        out.append({"axiom": "triangle", "pair": [int(i), int(k)], "via": int(j),
                    "slack": -s, "count": count})
    return out


_VIOLATION_CLASS = {
    "finite": NonFiniteEntry,
    "non-negative": NegativeEntry,
    "zero-diagonal": NonzeroDiagonal,
    "symmetry": AsymmetricInput,
    "separation": CoincidentPoints,
    "triangle": TriangleViolation,
}


def _describe(v: dict) -> str:
    ax = v["axiom"]
    if ax == "triangle":
        i, k = v["pair"]
        return f"triangle inequality fails at ({i},{k}) via {v['via']}, slack {v['slack']:g}"
    if ax == "zero-diagonal":
        return f"nonzero diagonal at {v['index']}"
    return f"{ax} fails at {tuple(v['pair'])}"


class FiniteMetricSpace:
    """n points with a validated distance matrix.

    Construct through :func:`validate_metric` (or directly; the constructor
    validates unless ``validate=False``). The matrix is stored read-only and
    the object is safe to share between threads.
    """

    def __init__(self, dist, labels: Sequence[str] | None = None,
                 tol_metric: float = DEFAULT_TOL, validate: bool = True):
        D = np.array(dist, dtype=np.float64, copy=True)
        if D.ndim != 2 or D.shape[0] != D.shape[1] or D.shape[0] < 1:
            raise NotSquare(f"expected a non-empty square matrix, got shape {D.shape}",
                            shape=list(D.shape))
        if validate:
            violations = _metric_violations(D, tol_metric)
            if violations:
                cls = _VIOLATION_CLASS[violations[0]["axiom"]]
                msg = "; ".join(_describe(v) for v in violations)
                raise cls(msg, violations=violations)
        D = 0.5 * (D + D.T)
        np.fill_diagonal(D, 0.0)
        D.setflags(write=False)
        self._dist = D
        if labels is not None and len(labels) != D.shape[0]:
            raise ValueError("labels must have one entry per point")
        self.labels = None if labels is None else tuple(str(s) for s in labels)
        self.tol_metric = float(tol_metric)

    @property
    def n(self) -> int:
        return self._dist.shape[0]

    @property
    def dist(self) -> np.ndarray:
        return self._dist

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"{type(self).__name__}(n={self.n}, diameter={self.diameter:g})"

    def pair_dist(self, i, j) -> np.ndarray:
        """Vectorised ``d(i, j)`` for index arrays of matching shape."""
        return self.dist[np.asarray(i), np.asarray(j)]

    @cached_property
    def diameter(self) -> float:
        return float(self.dist.max())

    @cached_property
    def between_tol(self) -> float:
        # absolute slack for "k lies between i and j"; floors rounding noise
        return max(self.tol_metric, 64 * np.finfo(float).eps * max(1.0, self.diameter))

    @cached_property
    def skeleton(self) -> np.ndarray:
        """Boolean adjacency of the metric skeleton."""
        D = self.dist
        n = self.n
        tol = self.between_tol
        adj = np.zeros((n, n), dtype=bool)
        for i in range(n):
            # between[k, j]: k is strictly between i and j
            between = (D[i, :, None] + D) <= D[i][None, :] + tol
            between[i, :] = False
            between[np.arange(n), np.arange(n)] = False
            adj[i] = ~between.any(axis=0)
        np.fill_diagonal(adj, False)
        adj &= adj.T
        adj.setflags(write=False)
        return adj

    @cached_property
    def quantum(self) -> float:
        """Longest skeleton edge: the discretisation allowance for continuum bounds."""
        if self.n == 1:
            return 0.0
        return float(self.dist[self.skeleton].max())

    @cached_property
    def next_hop(self) -> np.ndarray:
        """``next_hop[u, y]``: successor of ``u`` on the canonical u-y geodesic."""
        D = self.dist
        n = self.n
        tol = self.between_tol
        nxt = np.empty((n, n), dtype=np.int64)
        for u in range(n):
            nb = np.flatnonzero(self.skeleton[u])
            if nb.size == 0:
                nxt[u] = u
                continue
            excess = D[u, nb][:, None] + D[nb, :] - D[u][None, :]
            ok = excess <= tol
            pick = np.where(ok.any(axis=0), ok.argmax(axis=0), excess.argmin(axis=0))
            nxt[u] = nb[pick]
            nxt[u, u] = u
        nxt.setflags(write=False)
        return nxt

    @cached_property
    def paths(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Canonical geodesics of every ordered pair, padded.

        Returns ``(P, T, C)``: ``P[x, y, :C[x, y]]`` is the vertex sequence of
        ``geodesic(x, y)`` and ``T`` its cumulative arc length. Padding
        repeats the endpoint.
        """
        n = self.n
        D = self.dist
        nxt = self.next_hop
        Y = np.broadcast_to(np.arange(n)[None, :], (n, n))
        cur = np.broadcast_to(np.arange(n)[:, None], (n, n)).copy()
        t = np.zeros((n, n))
        pts, times = [cur], [t]
        count = np.ones((n, n), dtype=np.int64)
        while True:
            active = cur != Y
            if not active.any():
                break
            step = nxt[cur, Y]
            t = t + D[cur, step]
            cur = step
            count += active
            pts.append(cur)
            times.append(t)
            if len(pts) > n:
                raise RuntimeError("canonical routing did not terminate")
        P = np.ascontiguousarray(np.stack(pts, axis=-1))
        T = np.ascontiguousarray(np.stack(times, axis=-1))
        for a in (P, T, count):
            a.setflags(write=False)
        return P, T, count

    def rescaled(self, sigma: float) -> "FiniteMetricSpace":
        """The space ``(X, d / sigma)``."""
        if not sigma > 0:
            raise ParameterOutOfRange("scale must be positive", sigma=sigma)
        return FiniteMetricSpace(self.dist / sigma, self.labels,
                                 self.tol_metric / sigma, validate=False)

    def check_index(self, *idx: int) -> None:
        for i in idx:
            if not (isinstance(i, (int, np.integer)) and 0 <= i < self.n):
                raise ParameterOutOfRange(f"point index {i!r} outside 0..{self.n - 1}",
                                          index=repr(i))


class NormedSampleSpace(FiniteMetricSpace):
    """Points of the plane under an l1, l2 or linf norm.

    Distances are computed on demand, so large samples (tens of thousands of
    grid nodes) never materialise an n x n matrix unless ``dist`` is touched.
    """

    _ORD = {"l1": 1, "l2": 2, "linf": np.inf}

    def __init__(self, coords, norm: str = "l2", labels=None, tol_metric=DEFAULT_TOL):
        if norm not in self._ORD:
            raise ValueError(f"unknown norm {norm!r}")
        X = np.array(coords, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] < 1:
            raise NotSquare("coords must be an (n, k) array", shape=list(X.shape))
        X.setflags(write=False)
        self.coords = X
        self.norm = norm
        self.labels = None if labels is None else tuple(labels)
        self.tol_metric = float(tol_metric)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @cached_property
    def _dist(self) -> np.ndarray:
        diff = self.coords[:, None, :] - self.coords[None, :, :]
        D = np.linalg.norm(diff, ord=self._ORD[self.norm], axis=-1)
        D.setflags(write=False)
        return D

    def pair_dist(self, i, j) -> np.ndarray:
        diff = self.coords[np.asarray(i)] - self.coords[np.asarray(j)]
        return np.linalg.norm(diff, ord=self._ORD[self.norm], axis=-1)

    @cached_property
    def diameter(self) -> float:
        from scipy.spatial import ConvexHull

        X = self.coords
        if self.n <= 3:
            idx = np.arange(self.n)
        else:
            try:
                idx = ConvexHull(X).vertices
            except Exception:  # degenerate (collinear) samples
                idx = np.arange(self.n)
        sub = X[idx]
        diff = sub[:, None, :] - sub[None, :, :]
        return float(np.linalg.norm(diff, ord=self._ORD[self.norm], axis=-1).max())


def validate_metric(matrix, tol_metric: float = DEFAULT_TOL, labels=None) -> FiniteMetricSpace:
    """Validate ``matrix`` as a metric and wrap it.

    Raises the :class:`~metrictrees.errors.InvalidMetric` subclass of the
    first failed axiom; its ``violations`` attribute lists all of them, each
    with the worst offending pair or triple.
    """
    return FiniteMetricSpace(matrix, labels=labels, tol_metric=tol_metric)


@dataclass(frozen=True)
class GraphSpec:
    """Undirected weighted graph on vertices ``0..vertex_count-1``."""

    vertex_count: int
    edges: tuple = ()

    def __post_init__(self):
        if self.vertex_count < 1:
            raise InvalidGraph("graph needs at least one vertex")
        clean = []
        for e in self.edges:
            u, v, w = int(e[0]), int(e[1]), float(e[2])
            if u == v:
                raise InvalidGraph(f"self-loop at vertex {u}", edge=[u, v, w])
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise InvalidGraph(f"edge ({u},{v}) references a missing vertex", edge=[u, v, w])
            if not (w > 0 and math.isfinite(w)):
                raise InvalidGraph(f"edge ({u},{v}) has non-positive weight {w}", edge=[u, v, w])
            clean.append((u, v, w))
        object.__setattr__(self, "edges", tuple(clean))


def metric_from_graph(g: GraphSpec, tol_metric: float = DEFAULT_TOL,
                      validate: bool = True) -> FiniteMetricSpace:
    """All-pairs shortest-path metric of a connected graph."""
    n = g.vertex_count
    best: dict[tuple[int, int], float] = {}
    for u, v, w in g.edges:
        key = (min(u, v), max(u, v))
        best[key] = min(w, best.get(key, math.inf))
    if best:
        rows, cols = zip(*best)
        A = coo_matrix((list(best.values()), (rows, cols)), shape=(n, n)).tocsr()
    else:
        A = coo_matrix((n, n)).tocsr()
    D = shortest_path(A, method="D", directed=False)
    if not np.all(np.isfinite(D)):
        i, j = map(int, np.argwhere(~np.isfinite(D))[0])
        raise DisconnectedGraph(f"vertices {i} and {j} are not connected", pair=[i, j])
    return FiniteMetricSpace(D, tol_metric=tol_metric, validate=validate)


@dataclass(frozen=True, eq=False)
class DiscreteGeodesic:
    """Vertex sequence ``p_0..p_m`` with cumulative arc length ``s_0=0..s_m``."""

    points: tuple
    arclen: np.ndarray = field(repr=False)

    @property
    def length(self) -> float:
        return float(self.arclen[-1])

    @property
    def start(self) -> int:
        return self.points[0]

    @property
    def end(self) -> int:
        return self.points[-1]

    def __len__(self):
        return len(self.points)

    def reversed(self) -> "DiscreteGeodesic":
        s = self.length - self.arclen[::-1]
        s[0] = 0.0
        return DiscreteGeodesic(tuple(reversed(self.points)), s)

    def __eq__(self, other):
        return (isinstance(other, DiscreteGeodesic) and self.points == other.points
                and np.array_equal(self.arclen, other.arclen))

    def __hash__(self):
        return hash(self.points)


def _make_geodesic(space: FiniteMetricSpace, pts: Sequence[int]) -> DiscreteGeodesic:
    pts = tuple(int(p) for p in pts)
    steps = space.pair_dist(pts[:-1], pts[1:]) if len(pts) > 1 else np.empty(0)
    s = np.concatenate(([0.0], np.cumsum(steps)))
    return DiscreteGeodesic(pts, s)


def geodesic(space: FiniteMetricSpace, x: int, y: int) -> DiscreteGeodesic:
    """Canonical geodesic from ``x`` to ``y``.

    Among all skeleton shortest paths, returns the one whose vertex sequence
    is lexicographically smallest.
    """
    space.check_index(x, y)
    nxt = space.next_hop
    pts = [int(x)]
    u = int(x)
    while u != y:
        u = int(nxt[u, y])
        pts.append(u)
        if len(pts) > space.n:  # cannot happen for a valid metric
            raise RuntimeError("canonical routing did not terminate")
    return _make_geodesic(space, pts)


def all_geodesics(space: FiniteMetricSpace, x: int, y: int, cap: int = 64) -> list[DiscreteGeodesic]:
    """Every skeleton geodesic from ``x`` to ``y`` in lexicographic order.

    Raises :class:`GeodesicEnumerationCapExceeded` (with the first ``cap``
    paths as ``partial``) if there are more than ``cap``.
    """
    space.check_index(x, y)
    D = space.dist
    adj = space.skeleton
    tol = space.between_tol
    found: list[list[int]] = []

    def on_path(u):
        nb = np.flatnonzero(adj[u])
        return nb[np.abs(D[u, nb] + D[nb, y] - D[u, y]) <= tol]

    stack = [[int(x)]]
    while stack:
        path = stack.pop()
        u = path[-1]
        if u == y:
            found.append(path)
            if len(found) > cap:
                partial = [_make_geodesic(space, p) for p in found[:cap]]
                raise GeodesicEnumerationCapExceeded(
                    f"more than {cap} geodesics between {x} and {y}",
                    partial=partial, pair=[int(x), int(y)], cap=cap)
            continue
        for v in reversed(on_path(u)):
            stack.append(path + [int(v)])
    return [_make_geodesic(space, p) for p in found]


def eval_geodesic(geo: DiscreteGeodesic, t: float) -> int:
    """Vertex whose arc-length time is nearest to ``t``; ties go to the smaller index."""
    s = geo.arclen
    eps = TIE_EPS * max(1.0, abs(s[-1]))
    if not (-eps <= t <= s[-1] + eps):
        raise ParameterOutOfRange(f"t={t} outside [0, {s[-1]}]", t=t, length=float(s[-1]))
    gap = np.abs(s - t)
    i = int(np.flatnonzero(gap <= gap.min() + eps)[0])
    return geo.points[i]


@dataclass(frozen=True)
class Ball:
    """Closed ball ``{p : d(center, p) <= radius + tol}``."""

    center: int
    radius: float
    tol: float = BALL_TOL


def ball_mask(space: FiniteMetricSpace, b: Ball) -> np.ndarray:
    space.check_index(b.center)
    return space.dist[b.center] <= b.radius + b.tol


def ball_members(space: FiniteMetricSpace, b: Ball) -> frozenset:
    return frozenset(int(i) for i in np.flatnonzero(ball_mask(space, b)))


def set_diameter(space: FiniteMetricSpace, S: Iterable[int]) -> float:
    idx = np.fromiter((int(i) for i in S), dtype=np.int64)
    if idx.size == 0:
        raise EmptySetDiameter("diameter of the empty set is undefined")
    return float(space.dist[np.ix_(idx, idx)].max())


def midpoint_defects(space: FiniteMetricSpace) -> np.ndarray:
    """Per-pair midpoint defect.

    Entry ``(x, y)`` is ``min_m max(|d(x,m) - d/2|, |d(m,y) - d/2|)`` with
    ``d = d(x, y)``; zero exactly when some point is a metric midpoint.
    """
    D = space.dist
    n = space.n
    out = np.empty((n, n))
    for x in range(n):
        half = D[x][:, None] / 2.0  # indexed by y
        a = np.abs(D[x][None, :] - half)  # |d(x,m) - d/2|, rows y, cols m
        b = np.abs(D - half)  # |d(y,m) - d/2|
        out[x] = np.maximum(a, b).min(axis=1)
    return out


def geodesicity_defect(space: FiniteMetricSpace, pairs=None) -> float:
    """Worst midpoint defect over all pairs (or over ``pairs``).

    ``pairs`` may be an n x n boolean mask or an iterable of ``(x, y)``.
    """
    M = midpoint_defects(space)
    if pairs is None:
        return float(M.max())
    if isinstance(pairs, np.ndarray) and pairs.dtype == bool:
        sel = M[pairs]
    else:
        pairs = list(pairs)
        if not pairs:
            return 0.0
        xs, ys = zip(*pairs)
        sel = M[list(xs), list(ys)]
    return float(sel.max()) if sel.size else 0.0
