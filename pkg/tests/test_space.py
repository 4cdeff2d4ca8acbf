import math

import numpy as np
import pytest

from metrictrees.errors import (AsymmetricInput, CoincidentPoints, DisconnectedGraph,
                                EmptySetDiameter, GeodesicEnumerationCapExceeded,
                                InvalidGraph, NegativeEntry, NonFiniteEntry, NonzeroDiagonal,
                                NotSquare, ParameterOutOfRange, TriangleViolation)
from metrictrees.gallery import generate
from metrictrees.space import (Ball, FiniteMetricSpace, GraphSpec, NormedSampleSpace,
                               all_geodesics, ball_members, eval_geodesic, geodesic,
                               geodesicity_defect, metric_from_graph, midpoint_defects,
                               set_diameter, validate_metric)

import oracles


def path(n):
    return metric_from_graph(GraphSpec(n, [(i, i + 1, 1.0) for i in range(n - 1)]))


def cycle(n):
    return metric_from_graph(GraphSpec(n, [(i, (i + 1) % n, 1.0) for i in range(n)]))


# ---- validation

def test_valid_path_matrix():
    sp = validate_metric([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    assert sp.n == 3
    assert sp.dist[0, 2] == 2


def test_asymmetric_input_reports_pair():
    with pytest.raises(AsymmetricInput) as e:
        validate_metric([[0, 1], [2, 0]])
    assert e.value.violations[0]["pair"] == [0, 1]


def test_triangle_violation_reports_triple_and_slack():
    with pytest.raises(TriangleViolation) as e:
        validate_metric([[0, 1, 3], [1, 0, 1], [3, 1, 0]])
    v = e.value.violations[0]
    assert (v["pair"], v["via"], v["slack"]) == ([0, 2], 1, 1.0)


@pytest.mark.parametrize("matrix, err", [
    ([[0, 1, 2], [1, 0, 1]], NotSquare),
    ([[0, -1], [-1, 0]], NegativeEntry),
    ([[1, 1], [1, 0]], NonzeroDiagonal),
    ([[0, math.inf], [math.inf, 0]], NonFiniteEntry),
    ([[0, 0], [0, 0]], CoincidentPoints),
])
def test_validation_errors(matrix, err):
    with pytest.raises(err):
        validate_metric(matrix)


def test_validation_lists_every_failed_axiom():
    with pytest.raises(Exception) as e:
        validate_metric([[0, 1, 5], [2, 0, 1], [5, 1, 0]])
    axioms = {v["axiom"] for v in e.value.violations}
    assert {"symmetry", "triangle"} <= axioms


def test_dist_is_read_only():
    sp = path(3)
    with pytest.raises(ValueError):
        sp.dist[0, 1] = 5


def test_within_tolerance_asymmetry_is_symmetrised():
    sp = validate_metric([[0, 1 + 1e-12], [1, 0]])
    assert sp.dist[0, 1] == sp.dist[1, 0]


# ---- graphs

def test_graph_metrics():
    assert path(3).dist[0, 2] == 2
    assert cycle(4).dist[0, 2] == 2


def test_disconnected_graph():
    with pytest.raises(DisconnectedGraph):
        metric_from_graph(GraphSpec(4, [(0, 1, 1.0), (2, 3, 1.0)]))


@pytest.mark.parametrize("edges", [[(0, 0, 1.0)], [(0, 1, 0.0)], [(0, 5, 1.0)], [(0, 1, -2.0)]])
def test_bad_graph_specs(edges):
    with pytest.raises(InvalidGraph):
        GraphSpec(3, edges)


def test_graph_metric_matches_floyd_warshall():
    rng = np.random.default_rng(3)
    n = 12
    edges = [(i, i + 1, float(rng.integers(1, 6))) for i in range(n - 1)]
    edges += [(int(a), int(b), float(rng.integers(1, 9)))
              for a, b in rng.integers(0, n, (15, 2)) if a != b]
    D = metric_from_graph(GraphSpec(n, edges)).dist
    assert np.array_equal(D, oracles.floyd_warshall(n, edges))


# ---- geodesics

def test_path_geodesic():
    g = geodesic(path(5), 0, 4)
    assert g.points == (0, 1, 2, 3, 4)
    assert list(g.arclen) == [0, 1, 2, 3, 4]


def test_cycle_geodesic_lexicographic():
    assert geodesic(cycle(4), 0, 2).points == (0, 1, 2)


def test_star_geodesic():
    star = generate({"kind": "star", "n": 4})
    assert geodesic(star, 1, 2).points == (1, 0, 2)


def test_geodesic_to_self():
    g = geodesic(path(3), 1, 1)
    assert g.points == (1,) and g.length == 0


def test_canonical_geodesic_is_lex_smallest_shortest_path():
    grid = generate({"kind": "grid", "rows": 3, "cols": 3})
    D = grid.dist
    for x in range(9):
        for y in range(9):
            if x != y:
                assert geodesic(grid, x, y).points == oracles.all_shortest_paths(D, x, y)[0]


def test_all_geodesics_matches_oracle_and_cap():
    grid = generate({"kind": "grid", "rows": 3, "cols": 3})
    got = [g.points for g in all_geodesics(grid, 0, 8)]
    assert got == oracles.all_shortest_paths(grid.dist, 0, 8)
    assert len(got) == 6
    with pytest.raises(GeodesicEnumerationCapExceeded) as e:
        all_geodesics(grid, 0, 8, cap=4)
    assert len(e.value.partial) == 4


def test_eval_geodesic():
    g = geodesic(path(5), 0, 4)
    assert eval_geodesic(g, 2.4) == 2
    assert eval_geodesic(g, 0) == 0 and eval_geodesic(g, 4) == 4
    assert eval_geodesic(g, 0.5) == 0
    with pytest.raises(ParameterOutOfRange):
        eval_geodesic(g, 4.5)


def test_reversed_geodesic():
    g = geodesic(path(5), 0, 4).reversed()
    assert g.points == (4, 3, 2, 1, 0)
    assert list(g.arclen) == [0, 1, 2, 3, 4]


# ---- balls, diameters, defects

def test_balls_and_diameters():
    p = path(5)
    assert ball_members(p, Ball(2, 1)) == {1, 2, 3}
    assert set_diameter(p, {1, 2, 3}) == 2
    assert ball_members(p, Ball(0, 0)) == {0}
    assert set_diameter(p, {0}) == 0
    with pytest.raises(EmptySetDiameter):
        set_diameter(p, [])


def test_geodesicity_defect_examples():
    assert midpoint_defects(path(5))[0, 4] == 0
    assert geodesicity_defect(validate_metric([[0, 1], [1, 0]])) == 0.5
    snow = generate({"kind": "snowflake_line", "n": 17})
    assert math.isclose(midpoint_defects(snow)[0, 16], math.sqrt(8) - 2, rel_tol=1e-12)
    assert geodesicity_defect(snow) >= math.sqrt(8) - 2


def test_unit_tree_even_pairs_have_midpoints():
    T = generate({"kind": "random_tree", "n": 25, "seed": 4, "weight_range": [1, 1]})
    even = (T.dist.astype(int) % 2) == 0
    assert geodesicity_defect(T, even) == 0.0


def test_quantum_is_longest_edge_on_trees():
    T = generate({"kind": "random_tree", "n": 30, "seed": 2, "weight_range": [1, 7]})
    assert T.quantum == T.dist[T.skeleton].max()
    assert T.skeleton.sum() == 2 * 29


def test_rescaled_is_exact_for_powers_of_two():
    T = generate({"kind": "random_tree", "n": 10, "seed": 1})
    assert np.array_equal(T.rescaled(4).dist * 4, T.dist)


def test_normed_sample_space_lazy_and_consistent():
    X = np.array([[0, 0], [1, 0], [0, 2], [3, 1]], float)
    for norm, ord_ in (("l1", 1), ("l2", 2), ("linf", np.inf)):
        sp = NormedSampleSpace(X, norm)
        D = np.linalg.norm(X[:, None] - X[None], ord=ord_, axis=-1)
        assert np.allclose(sp.dist, D)
        assert np.allclose(sp.pair_dist([0, 1], [3, 2]), [D[0, 3], D[1, 2]])
        assert math.isclose(sp.diameter, D.max())


def test_labels_kept():
    sp = FiniteMetricSpace([[0, 1], [1, 0]], labels=["a", "b"])
    assert sp.labels == ("a", "b")
