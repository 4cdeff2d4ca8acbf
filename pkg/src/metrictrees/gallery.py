"""Deterministic test spaces and the planar lens computation."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import networkx as nx
import numpy as np

from .errors import InvalidMetric, InvalidSpec, ParameterOutOfRange, PerturbationBrokeMetric
from .space import (FiniteMetricSpace, GraphSpec, NormedSampleSpace, metric_from_graph,
                    validate_metric)

KINDS = ("path", "star", "cycle", "grid", "random_tree", "normed_disc_sample",
         "snowflake_line", "perturbed_tree")

# area of the unit disc of each norm, used to size the lattice
_DISC_AREA = {"l1": 2.0, "l2": math.pi, "linf": 4.0}


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int | None = None
    rows: int | None = None
    cols: int | None = None
    seed: int = 0
    weight_range: tuple | None = None
    integer_weights: bool = True
    norm: str = "l2"
    exponent: float = 0.5
    spacing: float = 1.0
    c: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidSpec(f"unknown kind {self.kind!r}", kinds=list(KINDS))
        if self.kind == "grid":
            if not self.rows or not self.cols or self.rows < 1 or self.cols < 1:
                raise InvalidSpec("grid needs rows >= 1 and cols >= 1")
        elif self.n is None or self.n < 1:
            raise InvalidSpec(f"{self.kind} needs n >= 1", n=self.n)
        if self.weight_range is not None:
            lo, hi = self.weight_range
            if not 0 < lo <= hi:
                raise InvalidSpec("weight_range must satisfy 0 < lo <= hi",
                                  weight_range=list(self.weight_range))
            object.__setattr__(self, "weight_range", (lo, hi))
        if self.norm not in _DISC_AREA:
            raise InvalidSpec(f"unknown norm {self.norm!r}")
        if not 0 < self.exponent <= 1:
            raise InvalidSpec("exponent must lie in (0, 1]", exponent=self.exponent)
        if self.spacing <= 0:
            raise InvalidSpec("spacing must be positive", spacing=self.spacing)
        if self.c < 0:
            raise InvalidSpec("perturbation bound c must be >= 0", c=self.c)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        known = {f.name for f in fields(cls)}
        extra = sorted(set(d) - known)
        if extra:
            raise InvalidSpec(f"unknown spec keys {extra}", keys=extra)
        if "kind" not in d:
            raise InvalidSpec("spec needs a 'kind'")
        d = dict(d)
        if d.get("weight_range") is not None:
            d["weight_range"] = tuple(d["weight_range"])
        try:
            return cls(**d)
        except TypeError as e:
            raise InvalidSpec(str(e)) from None

    def to_dict(self) -> dict:
        d = asdict(self)
        if d["weight_range"] is not None:
            d["weight_range"] = list(d["weight_range"])
        return d


def _weights(spec, m, rng):
    if spec.weight_range is None:
        return np.ones(m)
    lo, hi = spec.weight_range
    if spec.integer_weights:
        return rng.integers(int(math.ceil(lo)), int(math.floor(hi)) + 1, size=m).astype(float)
    return rng.uniform(lo, hi, size=m)


def _graph(n, edges, spec, rng):
    w = _weights(spec, len(edges), rng)
    return metric_from_graph(GraphSpec(n, [(u, v, float(x)) for (u, v), x in zip(edges, w)]))


def _random_tree_edges(n, rng):
    if n == 1:
        return []
    if n == 2:
        return [(0, 1)]
    prufer = rng.integers(0, n, size=n - 2).tolist()
    T = nx.from_prufer_sequence(prufer)
    return sorted((min(u, v), max(u, v)) for u, v in T.edges)


def _random_tree(spec, rng):
    if spec.weight_range is None:
        spec = GeneratorSpec(**{**spec.to_dict(), "weight_range": (1, 4), "kind": "random_tree"})
    return _graph(spec.n, _random_tree_edges(spec.n, rng), spec, rng)


def generate(spec: GeneratorSpec | dict) -> FiniteMetricSpace:
    """Build the space described by ``spec``; same spec, same matrix."""
    if isinstance(spec, dict):
        spec = GeneratorSpec.from_dict(spec)
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    if spec.kind == "path":
        return _graph(n, [(i, i + 1) for i in range(n - 1)], spec, rng)
    if spec.kind == "star":
        return _graph(n, [(0, i) for i in range(1, n)], spec, rng)
    if spec.kind == "cycle":
        if n < 3:
            raise InvalidSpec("cycle needs n >= 3", n=n)
        return _graph(n, [(i, (i + 1) % n) for i in range(n)], spec, rng)
    if spec.kind == "grid":
        R, C = spec.rows, spec.cols
        edges = [(i * C + j, i * C + j + 1) for i in range(R) for j in range(C - 1)]
        edges += [(i * C + j, (i + 1) * C + j) for i in range(R - 1) for j in range(C)]
        return _graph(R * C, sorted(edges), spec, rng)
    if spec.kind == "random_tree":
        return _random_tree(spec, rng)
    if spec.kind == "normed_disc_sample":
        return _normed_disc(n, spec.norm)
    if spec.kind == "snowflake_line":
        x = spec.spacing * np.arange(n, dtype=float)
        return validate_metric(np.abs(x[:, None] - x[None, :]) ** spec.exponent)
    if spec.kind == "perturbed_tree":
        return _perturbed_tree(spec, rng)
    raise InvalidSpec(f"unknown kind {spec.kind!r}")  # unreachable, kept for linters


def _normed_disc(n, norm):
    # lattice spacing so that roughly n nodes fall inside the unit disc
    h = math.sqrt(_DISC_AREA[norm] / n)
    k = int(math.floor(1.0 / h))
    g = h * np.arange(-k, k + 1)
    X, Y = np.meshgrid(g, g, indexing="ij")
    P = np.column_stack([X.ravel(), Y.ravel()])
    ords = {"l1": 1, "l2": 2, "linf": np.inf}
    inside = np.linalg.norm(P, ord=ords[norm], axis=1) <= 1.0 + 1e-12
    return NormedSampleSpace(P[inside], norm=norm)


def _perturbed_tree(spec, rng):
    """Tree metric plus symmetric noise in ``[c/2, c]`` off the diagonal.

    Noise of that range cannot break a triangle inequality (two noise terms
    always outweigh a third), but the result is still validated.
    """
    base = _random_tree(spec, rng)
    m = base.n
    noise = np.triu(rng.uniform(spec.c / 2, spec.c, size=(m, m)), 1)
    D = base.dist + noise + noise.T
    try:
        return validate_metric(D)
    except InvalidMetric as e:
        raise PerturbationBrokeMetric("perturbed matrix is not a metric", c=spec.c,
                                      cause=e.to_dict()) from None


def euclidean_lens_diameter(r1: float, h: float, samples: int = 100_000, seed: int = 0) -> dict:
    """Diameter of ``B(0, r1(1+h)) & B(2 r1 e1, r1(1+h))`` in the plane.

    ``closed_form`` is ``2 r1 sqrt(2h + h^2)``; ``sampled`` is the diameter
    of ``samples`` uniform points of the lens (rejection sampled from its
    bounding box).
    """
    if r1 <= 0 or h < 0:
        raise ParameterOutOfRange("need r1 > 0 and h >= 0", r1=r1, h=h)
    closed = 2.0 * math.sqrt(2 * h + h * h) * r1
    if h == 0:
        return {"r1": r1, "h": h, "closed_form": 0.0, "sampled": 0.0, "samples": 1}
    from scipy.spatial import ConvexHull

    R = r1 * (1 + h)
    a = math.sqrt(R * R - r1 * r1)
    lo = np.array([2 * r1 - R, -a])
    hi = np.array([R, a])
    rng = np.random.default_rng(seed)
    got = []
    need = samples
    while need > 0:
        P = lo + (hi - lo) * rng.random((2 * need + 64, 2))
        ok = (np.hypot(P[:, 0], P[:, 1]) <= R) & (np.hypot(P[:, 0] - 2 * r1, P[:, 1]) <= R)
        P = P[ok][:need]
        got.append(P)
        need -= len(P)
    P = np.concatenate(got)
    V = P[ConvexHull(P).vertices]
    sampled = float(np.sqrt(((V[:, None, :] - V[None, :, :]) ** 2).sum(-1)).max())
    return {"r1": r1, "h": h, "closed_form": closed, "sampled": sampled, "samples": samples}


def lens_blowup_curve(r1: float, h_list) -> list[tuple[float, float, float]]:
    """``(h, diam, diam / h)`` with ``diam`` the closed-form lens diameter."""
    h_list = [float(h) for h in h_list]
    if r1 <= 0 or not h_list or any(h <= 0 for h in h_list):
        raise ParameterOutOfRange("need r1 > 0 and positive h values", r1=r1, h_list=h_list)
    if any(b >= a for a, b in zip(h_list, h_list[1:])):
        raise ParameterOutOfRange("h_list must be strictly descending", h_list=h_list)
    out = []
    for h in h_list:
        diam = 2.0 * math.sqrt(2 * h + h * h) * r1
        out.append((h, diam, diam / h))
    return out
