import functools

import pytest

from metrictrees.gallery import generate

_CRITERIA = {}


@pytest.fixture
def criterion():
    """Record one acceptance criterion outcome; printed in the terminal summary."""

    def record(number, name, passed, detail=""):
        _CRITERIA[number] = (name, bool(passed), detail)
        print(f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}: {name} ({detail})")
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        name, passed, detail = _CRITERIA[number]
        terminalreporter.write_line(
            f"CRITERION {number:2d} {'PASS' if passed else 'FAIL'}: {name} ({detail})")


@functools.lru_cache(maxsize=None)
def acceptance_tree(seed: int, n: int = 60):
    """Random weighted tree used by the tree criteria (integer weights 1..4)."""
    return generate({"kind": "random_tree", "n": n, "seed": seed, "weight_range": [1, 4]})


@functools.lru_cache(maxsize=None)
def small_space(kind: str, **kw):
    return generate({"kind": kind, **kw})
