"""Thin triangles, tripods, four-point hyperbolicity and tree certification.

Two hyperbolicity constants are measured and never mixed:

* ``delta`` (thinness): the largest distance between matched-parameter
  points on the two edges leaving a vertex of a geodesic triangle, for
  ``t`` up to that vertex's tripod length;
* ``delta4`` (four-point): half the gap between the two largest of the
  three opposite-pair distance sums of a quadruple.

Thinness is sampled at vertex times, so it carries a discretisation error of
up to two skeleton edges; reports attach ``space.quantum``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._parallel import run_chunked
from ._sampling import all_combinations, lex_sorted, sample_combinations
from .errors import GeodesicEnumerationCapExceeded, NegativeTripod, ParameterOutOfRange
from .space import (
    DiscreteGeodesic,
    FiniteMetricSpace,
    TIE_EPS,
    all_geodesics,
    geodesic,
)

__all__ = [
    "FourPointResult",
    "ThinnessReport",
    "TreeCertificate",
    "TriangleAnalysis",
    "certify_tree",
    "four_point_delta",
    "parse_geodesic_mode",
    "space_thinness",
    "triangle_thinness",
    "tripod_lengths",
]

DEFAULT_BUDGET = 200_000


def tripod_lengths(space: FiniteMetricSpace, x1: int, x2: int, x3: int) -> tuple[float, float, float]:
    """The unique ``a1, a2, a3 >= 0`` with ``d(x_k, x_l) = a_k + a_l``."""
    space.check_index(x1, x2, x3)
    D = space.dist
    d12, d13, d23 = D[x1, x2], D[x1, x3], D[x2, x3]
    a = [0.5 * (d12 + d13 - d23), 0.5 * (d12 + d23 - d13), 0.5 * (d13 + d23 - d12)]
    for k, ak in enumerate(a):
        if ak < -space.tol_metric:
            raise NegativeTripod(f"tripod length a{k + 1}={ak:g} < 0: metric violated",
                                 vertices=[int(x1), int(x2), int(x3)], value=float(ak))
    return tuple(max(0.0, float(ak)) for ak in a)


def parse_geodesic_mode(mode) -> tuple[str, int]:
    """Accept ``"canonical"``, ``"exhaustive"``, ``"exhaustive:CAP"`` or a tuple."""
    if isinstance(mode, tuple):
        name, cap = mode
        return str(name), int(cap)
    name, _, cap = str(mode).partition(":")
    if name not in ("canonical", "exhaustive"):
        raise ParameterOutOfRange(f"unknown geodesic mode {mode!r}", mode=str(mode))
    return name, int(cap) if cap else 16


def _nearest(geo: DiscreteGeodesic, t: float) -> int:
    s = geo.arclen
    eps = TIE_EPS * max(1.0, abs(s[-1]))
    gap = np.abs(s - t)
    return geo.points[int(np.flatnonzero(gap <= gap.min() + eps)[0])]


@dataclass
class TriangleAnalysis:
    vertices: tuple
    edges: tuple  # (c12, c23, c13)
    tripod: tuple
    delta: float
    # sigma is 1-based (k, l, m); the two compared edges leave x_k
    worst_witness: dict = field(default_factory=dict)
    quantum: float = 0.0
    mode: str = "canonical"

    def to_dict(self):
        return {
            "vertices": list(self.vertices),
            "edges": [list(e.points) for e in self.edges],
            "tripod": list(self.tripod),
            "delta": self.delta,
            "worst_witness": self.worst_witness,
            "quantum": self.quantum,
            "mode": self.mode,
        }


def _thinness_of(space, a, edges, win):
    """Thinness and witness of one triangle with the given edge choice."""
    D = space.dist
    lookup = {(0, 1): edges[0], (1, 2): edges[1], (0, 2): edges[2]}

    def leaving(k, l):
        return lookup[(k, l)] if k < l else lookup[(l, k)].reversed()

    best = None
    for k, (l, m) in ((0, (1, 2)), (1, (0, 2)), (2, (0, 1))):
        A, B = leaving(k, l), leaving(k, m)
        for src in (A, B):
            for t in src.arclen:
                if t > a[k] + win:
                    break
                pa, pb = _nearest(A, t), _nearest(B, t)
                cand = (-float(D[pa, pb]), k, float(t), pa, pb, l, m)
                if best is None or cand[:3] < best[:3]:
                    best = cand
    negd, k, t, pa, pb, l, m = best
    witness = {"sigma": [k + 1, l + 1, m + 1], "t": t, "distance": -negd,
               "points": [int(pa), int(pb)]}
    return -negd, witness


def triangle_thinness(space: FiniteMetricSpace, x1: int, x2: int, x3: int,
                      geodesic_mode="canonical") -> TriangleAnalysis:
    """Measured thinness of the geodesic triangle on ``x1, x2, x3``.

    In exhaustive mode every combination of geodesic edges is tried and the
    worst is reported; more than ``cap`` geodesics on any edge raises
    :class:`GeodesicEnumerationCapExceeded` carrying the partial analysis.
    """
    a = tripod_lengths(space, x1, x2, x3)
    verts = (int(x1), int(x2), int(x3))
    win = space.between_tol
    mode, cap = parse_geodesic_mode(geodesic_mode)
    if mode == "canonical":
        edges = (geodesic(space, x1, x2), geodesic(space, x2, x3), geodesic(space, x1, x3))
        delta, wit = _thinness_of(space, a, edges, win)
        return TriangleAnalysis(verts, edges, a, delta, wit, space.quantum, "canonical")

    choices, overflow = [], None
    for u, v in ((x1, x2), (x2, x3), (x1, x3)):
        try:
            choices.append(all_geodesics(space, u, v, cap))
        except GeodesicEnumerationCapExceeded as exc:
            choices.append(exc.partial)
            overflow = exc
    best = None
    for combo in itertools.product(*choices):
        delta, wit = _thinness_of(space, a, combo, win)
        if best is None or delta > best.delta:
            best = TriangleAnalysis(verts, combo, a, delta, wit, space.quantum, f"exhaustive:{cap}")
    if overflow is not None:
        raise GeodesicEnumerationCapExceeded(str(overflow), partial=best, **overflow.details)
    return best


@dataclass
class ThinnessReport:
    delta: float
    worst: TriangleAnalysis | None
    exact: bool
    triangles: int
    seed: int
    mode: str
    quantum: float

    def to_dict(self):
        return {
            "delta": self.delta,
            "worst": None if self.worst is None else self.worst.to_dict(),
            "exact": self.exact,
            "bound": "exact" if self.exact else "lower",
            "triangles": self.triangles,
            "seed": self.seed,
            "mode": self.mode,
            "quantum": self.quantum,
            "discretisation_allowance": 2 * self.quantum,
        }


def _triangles(n, budget, seed):
    total = math.comb(n, 3)
    if total <= budget:
        return all_combinations(n, 3), True
    rng = np.random.default_rng(seed)
    return sample_combinations(rng, n, 3, budget), False


def space_thinness(space: FiniteMetricSpace, budget: int = DEFAULT_BUDGET, seed: int = 0,
                   geodesic_mode="canonical", threads=None) -> ThinnessReport:
    """Largest triangle thinness: exact when ``C(n,3) <= budget``, else a sampled lower bound."""
    if budget < 1:
        raise ParameterOutOfRange("budget must be >= 1", budget=budget)
    mode, cap = parse_geodesic_mode(geodesic_mode)
    mode_name = "canonical" if mode == "canonical" else f"exhaustive:{cap}"
    n = space.n
    if n < 3:
        return ThinnessReport(0.0, None, True, 0, seed, mode_name, space.quantum)
    tris, exact = _triangles(n, budget, seed)

    if mode == "canonical":
        D = np.ascontiguousarray(space.dist)
        P, T, C = space.paths
        win = space.between_tol

        def work(lo, hi):
            m = hi - lo
            delta = np.empty(m)
            _kernels.thinness_kernel(D, P, T, C, tris[lo:hi], win, delta,
                                     np.empty(m, np.int64), np.empty(m))
            return delta

        deltas = np.concatenate(run_chunked(work, len(tris), threads=threads))
        q = int(np.argmax(deltas))
        worst = triangle_thinness(space, *map(int, tris[q]))
        return ThinnessReport(float(deltas[q]), worst, exact, len(tris), seed, mode_name,
                              space.quantum)

    best = None
    for tri in tris:
        ta = triangle_thinness(space, *map(int, tri), geodesic_mode=(mode, cap))
        if best is None or ta.delta > best.delta:
            best = ta
    return ThinnessReport(best.delta, best, exact, len(tris), seed, mode_name, space.quantum)


def _quad_defects(D, I, J, K, L):
    s1 = D[I, J] + D[K, L]
    s2 = D[I, K] + D[J, L]
    s3 = D[I, L] + D[J, K]
    big = np.maximum(np.maximum(s1, s2), s3)
    mid = np.maximum(np.minimum(s1, s2), np.minimum(np.maximum(s1, s2), s3))
    return 0.5 * (big - mid)


@dataclass
class FourPointResult:
    delta: float
    quadruple: tuple | None
    sums: tuple | None
    exact: bool
    quadruples: int
    seed: int

    def __float__(self):
        return self.delta

    def to_dict(self):
        return {
            "delta4": self.delta,
            "quadruple": None if self.quadruple is None else list(self.quadruple),
            "sums": None if self.sums is None else list(self.sums),
            "exact": self.exact,
            "bound": "exact" if self.exact else "lower",
            "quadruples": self.quadruples,
            "seed": self.seed,
        }


def _sums(D, q):
    i, j, k, l = q
    return (float(D[i, j] + D[k, l]), float(D[i, k] + D[j, l]), float(D[i, l] + D[j, k]))


def four_point_delta(space: FiniteMetricSpace, budget: int | None = None, seed: int = 0,
                     threads=None) -> FourPointResult:
    """Four-point hyperbolicity, exact when ``budget`` is None or covers ``C(n,4)``."""
    n = space.n
    D = space.dist
    if n < 4:
        return FourPointResult(0.0, None, None, True, 0, seed)
    total = math.comb(n, 4)
    if budget is not None and budget < 1:
        raise ParameterOutOfRange("budget must be >= 1", budget=budget)

    if budget is None or total <= budget:
        tri = all_combinations(n, 3)
        # combos of 3 whose first element is > i form a suffix of the lex-sorted list
        start = np.searchsorted(tri[:, 0], np.arange(n + 1), side="left")

        def work(lo, hi):
            best = (-1.0, None)
            for i in range(lo, hi):
                rest = tri[start[i + 1]:]
                if len(rest) == 0:
                    continue
                dfc = _quad_defects(D, i, rest[:, 0], rest[:, 1], rest[:, 2])
                q = int(np.argmax(dfc))
                if dfc[q] > best[0]:
                    best = (float(dfc[q]), (i, *map(int, rest[q])))
            return best

        parts = run_chunked(work, n - 3, chunk=max(1, (n - 3) // 32), threads=threads)
        delta, quad = max(parts, key=lambda p: p[0])  # first maximum: lexicographically smallest
        return FourPointResult(delta, quad, _sums(D, quad), True, total, seed)

    rng = np.random.default_rng(seed)
    quads = sample_combinations(rng, n, 4, budget)
    dfc = _quad_defects(D, quads[:, 0], quads[:, 1], quads[:, 2], quads[:, 3])
    q = int(np.argmax(dfc))
    quad = tuple(map(int, quads[q]))
    return FourPointResult(float(dfc[q]), quad, _sums(D, quad), False, budget, seed)


@dataclass
class TreeCertificate:
    is_tree: bool
    delta4: float
    quadruple: tuple | None
    sums: tuple | None
    tol: float
    thinness: float | None = None

    def to_dict(self):
        return {
            "is_tree": self.is_tree,
            "delta4": self.delta4,
            "quadruple": None if self.quadruple is None else list(self.quadruple),
            "sums": None if self.sums is None else list(self.sums),
            "tol": self.tol,
            "thinness": self.thinness,
        }


def certify_tree(space: FiniteMetricSpace, tol: float = 1e-9, corroborate: bool = False,
                 threads=None) -> TreeCertificate:
    """Tree test by the exact four-point condition.

    With ``corroborate=True`` the exhaustive canonical thinness is attached
    as an independent cross-check (it never decides the verdict).
    """
    fp = four_point_delta(space, threads=threads)
    thin = None
    if corroborate:
        thin = space_thinness(space, budget=math.comb(space.n, 3) or 1, threads=threads).delta
    return TreeCertificate(fp.delta <= tol, fp.delta, fp.quadruple, fp.sums, tol, thin)
