import math

import numpy as np
import pytest

from metrictrees.errors import InvalidSpec, ParameterOutOfRange
from metrictrees.gallery import (KINDS, GeneratorSpec, euclidean_lens_diameter, generate,
                                 lens_blowup_curve)
from metrictrees.hyperbolicity import certify_tree
from metrictrees.lens import diamond_scan
from metrictrees.space import validate_metric

SAMPLE_SPECS = [
    {"kind": "path", "n": 6},
    {"kind": "star", "n": 5},
    {"kind": "cycle", "n": 7},
    {"kind": "grid", "rows": 3, "cols": 4},
    {"kind": "random_tree", "n": 20, "seed": 3},
    {"kind": "random_tree", "n": 15, "seed": 2, "weight_range": [0.5, 2.0], "integer_weights": False},
    {"kind": "normed_disc_sample", "n": 40, "norm": "l1"},
    {"kind": "normed_disc_sample", "n": 40, "norm": "linf"},
    {"kind": "snowflake_line", "n": 9},
    {"kind": "snowflake_line", "n": 9, "exponent": 0.3, "spacing": 0.5},
    {"kind": "perturbed_tree", "n": 15, "seed": 4, "c": 0.5},
]


def test_path():
    assert np.array_equal(generate({"kind": "path", "n": 5}).dist,
                          np.abs(np.subtract.outer(np.arange(5), np.arange(5))))


def test_snowflake():
    s = generate({"kind": "snowflake_line", "n": 3})
    assert math.isclose(s.dist[0, 2], math.sqrt(2))


def test_random_tree_is_deterministic():
    a = generate({"kind": "random_tree", "n": 50, "seed": 7})
    b = generate(GeneratorSpec("random_tree", n=50, seed=7))
    assert np.array_equal(a.dist, b.dist)
    assert not np.array_equal(a.dist, generate({"kind": "random_tree", "n": 50, "seed": 8}).dist)


@pytest.mark.parametrize("spec", SAMPLE_SPECS, ids=lambda s: s["kind"])
def test_every_kind_validates(spec):
    sp = generate(spec)
    validate_metric(sp.dist)
    assert np.array_equal(sp.dist, generate(spec).dist)


def test_all_kinds_covered():
    assert {s["kind"] for s in SAMPLE_SPECS} == set(KINDS)


@pytest.mark.parametrize("seed", range(1, 6))
def test_random_trees_certify(seed):
    cert = certify_tree(generate({"kind": "random_tree", "n": 30, "seed": seed}))
    assert cert.is_tree and cert.delta4 == 0


def test_grid_layout():
    g = generate({"kind": "grid", "rows": 2, "cols": 3})
    assert g.dist[0, 5] == 3 and g.dist[0, 3] == 1


def test_normed_disc_sample_size_and_norm():
    for norm in ("l1", "l2", "linf"):
        sp = generate({"kind": "normed_disc_sample", "n": 200, "norm": norm})
        assert 0.8 * 200 <= sp.n <= 1.2 * 200
        assert sp.norm == norm


def test_spec_round_trip():
    spec = GeneratorSpec.from_dict({"kind": "grid", "rows": 2, "cols": 2, "seed": 4})
    assert GeneratorSpec.from_dict(spec.to_dict()) == spec


@pytest.mark.parametrize("bad", [
    {"kind": "blob", "n": 3},
    {"n": 3},
    {"kind": "path", "n": 0},
    {"kind": "grid", "rows": 0, "cols": 2},
    {"kind": "cycle", "n": 2},
    {"kind": "path", "n": 3, "colour": "red"},
    {"kind": "random_tree", "n": 5, "weight_range": [3, 1]},
    {"kind": "normed_disc_sample", "n": 5, "norm": "l3"},
    {"kind": "snowflake_line", "n": 5, "exponent": 1.5},
    {"kind": "perturbed_tree", "n": 5, "c": -1},
])
def test_bad_specs(bad):
    with pytest.raises(InvalidSpec):
        generate(bad)


def test_perturbed_tree_is_near_its_base():
    base = generate({"kind": "random_tree", "n": 20, "seed": 3})
    pert = generate({"kind": "perturbed_tree", "n": 20, "seed": 3, "c": 0.25})
    off = ~np.eye(20, dtype=bool)
    diff = (pert.dist - base.dist)[off]
    assert diff.min() >= 0.125 and diff.max() <= 0.25


def test_perturbed_tree_gap_tends_to_two_quanta_as_noise_vanishes():
    # with tiny noise every pair of equal vertex distances splits, and the
    # parity lens of the unperturbed tree widens to about two edges
    sp = generate({"kind": "perturbed_tree", "n": 30, "seed": 1, "c": 0.001, "weight_range": [1, 1]})
    gap = diamond_scan(sp).sup_gap_add
    assert gap > 4 * 0.001
    assert abs(gap - 2.0) < 0.01


def test_euclidean_lens_diameter():
    out = euclidean_lens_diameter(1, 0.5)
    assert math.isclose(out["closed_form"], 2 * math.sqrt(1.25))
    assert euclidean_lens_diameter(1, 0)["closed_form"] == 0
    s = euclidean_lens_diameter(1, 0.1, samples=100_000)
    assert abs(s["sampled"] - s["closed_form"]) <= 0.01 * s["closed_form"]
    assert s["sampled"] <= s["closed_form"]
    assert euclidean_lens_diameter(2, 0.1, seed=4) == euclidean_lens_diameter(2, 0.1, seed=4)
    with pytest.raises(ParameterOutOfRange):
        euclidean_lens_diameter(0, 0.1)


def test_lens_blowup_curve():
    curve = lens_blowup_curve(1, [0.5, 0.05, 0.005])
    ratios = [r for _, _, r in curve]
    assert math.isclose(ratios[0], 4.47213595499958, rel_tol=1e-12)
    assert abs(ratios[2] - 2 * math.sqrt(2 / 0.005 + 1)) < 1e-6
    assert ratios[0] < ratios[1] < ratios[2]
    # about sqrt(10) per decade once h is small
    assert abs(ratios[2] / ratios[1] - math.sqrt(10)) < 0.1
    with pytest.raises(ParameterOutOfRange):
        lens_blowup_curve(1, [0.05, 0.5])
    with pytest.raises(ParameterOutOfRange):
        lens_blowup_curve(1, [0.5, 0])
